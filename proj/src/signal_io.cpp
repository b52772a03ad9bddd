#include "protoneuro/signal_io.hpp"

#include "protoneuro/dpv_waveform.hpp"
#include "protoneuro/error.hpp"
#include "protoneuro/random.hpp"
#include "text.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace protoneuro {

const char* to_string(Unit unit)
{
    return unit == Unit::Volt ? "volt" : "microampere";
}

Unit unit_from_string(const std::string& s)
{
    if (s == "microampere" || s == "uA" || s == "µA")
        return Unit::Microampere;
    if (s == "volt" || s == "V")
        return Unit::Volt;
    throw Error(ErrorKind::Parse, "unknown unit '" + s + "'");
}

TimeSeries::TimeSeries(std::vector<double> times, std::vector<double> values, Unit unit,
                       std::string label)
    : times_(std::move(times)), values_(std::move(values)), unit_(unit),
      label_(std::move(label))
{
    if (times_.empty())
        throw Error(ErrorKind::Validation, "time series must have at least one sample");
    if (times_.size() != values_.size())
        throw Error(ErrorKind::Validation, "times and values differ in length");
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (!std::isfinite(times_[i]) || !std::isfinite(values_[i]))
            throw Error(ErrorKind::Validation,
                        "non-finite sample at index " + std::to_string(i));
        if (i > 0 && !(times_[i] > times_[i - 1]))
            throw Error(ErrorKind::Validation,
                        "non-monotone time stamp at index " + std::to_string(i));
    }
}

TimeSeries TimeSeries::with_label(std::string label) const
{
    TimeSeries copy = *this;
    copy.label_ = std::move(label);
    return copy;
}

TimeSeries read_timeseries_csv(std::istream& in, const std::string& source)
{
    std::string line;
    std::size_t line_no = 0;
    auto parse_error = [&](const std::string& what) {
        return Error(ErrorKind::Parse,
                     source + ":" + std::to_string(line_no) + ": " + what);
    };

    bool have_header = false;
    Unit unit = Unit::Microampere;
    std::string label;
    std::vector<double> times, values;

    while (std::getline(in, line)) {
        ++line_no;
        auto text = detail::trim(line);
        if (text.empty())
            continue;
        if (text.front() == '#') {
            auto meta = detail::trim(text.substr(1));
            auto eq = meta.find('=');
            if (eq == std::string_view::npos)
                continue;
            auto key = detail::trim(meta.substr(0, eq));
            auto value = std::string(detail::trim(meta.substr(eq + 1)));
            try {
                if (key == "unit")
                    unit = unit_from_string(value);
            } catch (const Error& e) {
                throw parse_error(e.what());
            }
            if (key == "label")
                label = value;
            continue;
        }
        auto fields = detail::split_csv(text);
        if (!have_header) {
            if (fields.size() < 2 || fields[0] != "time_s" || fields[1] != "value")
                throw parse_error("expected header 'time_s,value'");
            have_header = true;
            continue;
        }
        if (fields.size() != 2)
            throw parse_error("expected 2 fields, got " + std::to_string(fields.size()));
        auto t = detail::parse_double(fields[0]);
        auto v = detail::parse_double(fields[1]);
        if (!t || !v)
            throw parse_error("malformed number");
        times.push_back(*t);
        values.push_back(*v);
    }
    if (!have_header)
        throw Error(ErrorKind::Parse, source + ": missing header");
    if (times.empty())
        throw Error(ErrorKind::Validation, source + ": no samples");
    try {
        return TimeSeries(std::move(times), std::move(values), unit, std::move(label));
    } catch (const Error& e) {
        throw Error(e.kind(), source + ": " + e.what());
    }
}

TimeSeries read_timeseries_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::Io, "cannot open " + path);
    return read_timeseries_csv(in, path);
}

void write_timeseries_csv(const TimeSeries& series, std::ostream& out)
{
    out << "time_s,value\n";
    out << "# unit=" << to_string(series.unit()) << '\n';
    if (!series.label().empty())
        out << "# label=" << series.label() << '\n';
    const auto t = series.times();
    const auto v = series.values();
    for (std::size_t i = 0; i < t.size(); ++i)
        out << detail::format_shortest(t[i]) << ',' << detail::format_shortest(v[i]) << '\n';
}

void write_timeseries_csv(const TimeSeries& series, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
    write_timeseries_csv(series, out);
    out.flush();
    if (!out)
        throw Error(ErrorKind::Io, "write failed: " + path);
}

TimeSeries waveform_to_timeseries(const dpv::PotentialWaveform& waveform, std::string label)
{
    std::vector<double> t, v;
    t.reserve(waveform.segments.size());
    v.reserve(waveform.segments.size());
    for (const auto& s : waveform.segments) {
        t.push_back(s.start_time);
        v.push_back(s.potential);
    }
    return TimeSeries(std::move(t), std::move(v), Unit::Volt, std::move(label));
}

void validate(const SyntheticSpikeSpec& spec)
{
    auto fail = [](const std::string& what) {
        throw Error(ErrorKind::InvalidParameters, "invalid synthetic spec: " + what);
    };
    if (!(std::isfinite(spec.duration) && spec.duration > 0.0))
        fail("duration must be > 0");
    if (!(std::isfinite(spec.sample_interval) && spec.sample_interval > 0.0))
        fail("sample_interval must be > 0");
    if (!(std::isfinite(spec.spike_amplitude) && spec.spike_amplitude > 0.0))
        fail("spike_amplitude must be > 0");
    if (!(std::isfinite(spec.spike_half_width) && spec.spike_half_width > 0.0))
        fail("spike_half_width must be > 0");
    if (!std::isfinite(spec.baseline))
        fail("baseline must be finite");
    if (!(std::isfinite(spec.noise_sd) && spec.noise_sd >= 0.0))
        fail("noise_sd must be >= 0");
    if (spec.spike_times) {
        const auto& st = *spec.spike_times;
        for (std::size_t i = 0; i < st.size(); ++i) {
            if (!(st[i] >= 0.0 && st[i] <= spec.duration))
                fail("spike_times must lie within [0, duration]");
            if (i > 0 && !(st[i] > st[i - 1]))
                fail("spike_times must be strictly increasing");
        }
    } else {
        if (!(spec.jitter_fraction >= 0.0 && spec.jitter_fraction < 1.0))
            fail("jitter_fraction must be in [0, 1)");
        if (spec.count >= 2 && !(std::isfinite(spec.mean_isi) && spec.mean_isi > 0.0))
            fail("mean_isi must be > 0");
        if (spec.count >= 2 &&
            static_cast<double>(spec.count - 1) * spec.mean_isi > spec.duration)
            fail("count * mean_isi does not fit in duration");
    }
}

std::vector<double> planned_spike_times(const SyntheticSpikeSpec& spec)
{
    validate(spec);
    if (spec.spike_times)
        return *spec.spike_times;
    if (spec.count == 0)
        return {};
    if (spec.count == 1)
        return {spec.duration / 2.0};

    Rng rng(derive_seed(spec.seed, "synth.spike_times"));
    std::vector<double> isi(spec.count - 1);
    for (auto& d : isi)
        d = 1.0 + spec.jitter_fraction * rng.uniform(-1.0, 1.0);
    const double span = static_cast<double>(isi.size()) * spec.mean_isi;
    const double scale = span / std::accumulate(isi.begin(), isi.end(), 0.0);

    std::vector<double> times(spec.count);
    times[0] = (spec.duration - span) / 2.0;
    for (std::size_t i = 1; i < spec.count; ++i)
        times[i] = times[i - 1] + isi[i - 1] * scale;
    return times;
}

TimeSeries synthesize_spiky_series(const SyntheticSpikeSpec& spec)
{
    const auto centres = planned_spike_times(spec);
    const auto n = static_cast<std::size_t>(std::floor(spec.duration / spec.sample_interval)) + 1;

    std::vector<double> times(n), values(n, spec.baseline);
    for (std::size_t i = 0; i < n; ++i)
        times[i] = static_cast<double>(i) * spec.sample_interval;

    const double sigma = spec.spike_half_width / std::sqrt(2.0 * std::log(2.0));
    const double reach = 12.0 * sigma;
    for (double c : centres) {
        const auto lo = static_cast<std::ptrdiff_t>(std::ceil((c - reach) / spec.sample_interval));
        const auto hi = static_cast<std::ptrdiff_t>(std::floor((c + reach) / spec.sample_interval));
        for (auto i = std::max<std::ptrdiff_t>(lo, 0);
             i <= std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(n) - 1); ++i) {
            const double z = (times[static_cast<std::size_t>(i)] - c) / sigma;
            values[static_cast<std::size_t>(i)] += spec.spike_amplitude * std::exp(-0.5 * z * z);
        }
    }

    if (spec.noise_sd > 0.0) {
        Rng rng(derive_seed(spec.seed, "synth.noise"));
        for (auto& v : values)
            v += spec.noise_sd * rng.normal();
    }
    return TimeSeries(std::move(times), std::move(values), Unit::Microampere, spec.label);
}

} // namespace protoneuro
