#include "protoneuro/dpv_waveform.hpp"

#include "protoneuro/error.hpp"
#include "text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

namespace protoneuro::dpv {

namespace {

void require(bool ok, const std::string& what)
{
    if (!ok)
        throw Error(ErrorKind::InvalidParameters, "invalid DPV parameter: " + what);
}

double direction(const DpvParameters& p)
{
    return p.end_potential > p.start_potential ? 1.0 : -1.0;
}

// Start time of step k (1-based), computed by multiplication so boundaries do
// not accumulate rounding error over tens of thousands of steps.
double step_start(const DpvParameters& p, std::size_t k)
{
    return p.equilibrium_time + static_cast<double>(k - 1) * p.step_duration();
}

double base_potential(const DpvParameters& p, std::size_t k)
{
    return p.start_potential + direction(p) * static_cast<double>(k) * p.step_size;
}

} // namespace

void validate(const DpvParameters& p)
{
    require(std::isfinite(p.equilibrium_time) && p.equilibrium_time >= 0.0,
            "equilibrium_time must be >= 0");
    require(std::isfinite(p.start_potential), "start_potential must be finite");
    require(std::isfinite(p.end_potential), "end_potential must be finite");
    require(p.start_potential != p.end_potential,
            "start_potential must differ from end_potential");
    require(std::isfinite(p.step_size) && p.step_size > 0.0, "step_size must be > 0");
    require(std::isfinite(p.pulse_amplitude), "pulse_amplitude must be finite");
    require(std::isfinite(p.pulse_width) && p.pulse_width > 0.0, "pulse_width must be > 0");
    require(std::isfinite(p.scan_rate) && p.scan_rate > 0.0, "scan_rate must be > 0");
    require(p.pulse_width < p.step_duration(),
            "pulse_width must be shorter than step_size / scan_rate");
    require(std::llround(std::abs(p.end_potential - p.start_potential) / p.step_size) >= 1,
            "step_size larger than twice the scan span");
}

const char* to_string(Phase phase)
{
    switch (phase) {
    case Phase::Equilibrium: return "equilibrium";
    case Phase::Base: return "base";
    case Phase::Pulse: return "pulse";
    }
    return "";
}

const char* to_string(SampleKind kind)
{
    return kind == SampleKind::BeforePulse ? "before_pulse" : "after_pulse";
}

std::size_t step_count(const DpvParameters& params)
{
    validate(params);
    const double ratio =
        std::abs(params.end_potential - params.start_potential) / params.step_size;
    return static_cast<std::size_t>(std::llround(ratio));
}

double scan_duration(const DpvParameters& params)
{
    return static_cast<double>(step_count(params)) * params.step_duration();
}

PotentialWaveform generate_waveform(const DpvParameters& params)
{
    const std::size_t steps = step_count(params);
    const double base_len = params.step_duration() - params.pulse_width;

    PotentialWaveform wf;
    wf.segments.reserve(2 * steps + 1);
    if (params.equilibrium_time > 0.0)
        wf.segments.push_back(
            {0.0, params.equilibrium_time, params.start_potential, Phase::Equilibrium});

    for (std::size_t k = 1; k <= steps; ++k) {
        const double t0 = step_start(params, k);
        const double t_pulse = t0 + base_len;
        const double t_next = step_start(params, k + 1);
        const double base = base_potential(params, k);
        wf.segments.push_back({t0, t_pulse - t0, base, Phase::Base});
        wf.segments.push_back(
            {t_pulse, t_next - t_pulse, base + params.pulse_amplitude, Phase::Pulse});
    }
    wf.total_duration = step_start(params, steps + 1);
    return wf;
}

std::vector<SampleInstant> sample_instants(const DpvParameters& params)
{
    const std::size_t steps = step_count(params);
    const double base_len = params.step_duration() - params.pulse_width;
    std::vector<SampleInstant> out;
    out.reserve(2 * steps);
    for (std::size_t k = 1; k <= steps; ++k) {
        out.push_back({step_start(params, k) + base_len, SampleKind::BeforePulse});
        out.push_back({step_start(params, k + 1), SampleKind::AfterPulse});
    }
    return out;
}

double PotentialWaveform::potential_at(double t) const
{
    if (segments.empty() || !(t >= 0.0) || t > total_duration)
        throw Error(ErrorKind::InvalidParameters, "time outside waveform");
    auto it = std::upper_bound(segments.begin(), segments.end(), t,
                               [](double v, const Segment& s) { return v < s.start_time; });
    return std::prev(it)->potential;
}

void write_waveform_csv(const PotentialWaveform& waveform, std::ostream& out)
{
    using detail::format_shortest;
    out << "time_s,potential_V,phase\n";
    for (const auto& s : waveform.segments)
        out << format_shortest(s.start_time) << ',' << format_shortest(s.potential) << ','
            << to_string(s.phase) << '\n';
    if (!waveform.segments.empty()) {
        const auto& last = waveform.segments.back();
        out << format_shortest(waveform.total_duration) << ','
            << format_shortest(last.potential) << ',' << to_string(last.phase) << '\n';
    }
}

void write_waveform_csv(const PotentialWaveform& waveform, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
    write_waveform_csv(waveform, out);
    if (!out)
        throw Error(ErrorKind::Io, "write failed: " + path);
}

void write_instants_csv(const PotentialWaveform& waveform,
                        const std::vector<SampleInstant>& instants, std::ostream& out)
{
    using detail::format_shortest;
    out << "time_s,kind,potential_V\n";
    for (const auto& inst : instants) {
        // The instant closes a phase, so report the potential held just before it.
        auto it = std::lower_bound(
            waveform.segments.begin(), waveform.segments.end(), inst.time,
            [](const Segment& s, double v) { return s.start_time < v; });
        const double v = it == waveform.segments.begin() ? it->potential
                                                         : std::prev(it)->potential;
        out << format_shortest(inst.time) << ',' << to_string(inst.kind) << ','
            << format_shortest(v) << '\n';
    }
}

} // namespace protoneuro::dpv
