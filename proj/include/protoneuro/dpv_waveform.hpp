#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace protoneuro::dpv {

/// Instrument settings for a differential pulse voltammetry scan.
///
/// Defaults are the protocol used for the proteinoid recordings:
/// 100 s equilibration, -8 V to 8 V in 1 mV steps at 1 mV/s, with
/// 0.2 V pulses lasting 80 ms.
struct DpvParameters {
    double equilibrium_time = 100.0; // s
    double start_potential = -8.0;   // V
    double end_potential = 8.0;      // V
    double step_size = 0.001;        // V
    double pulse_amplitude = 0.2;    // V
    double pulse_width = 0.08;       // s
    double scan_rate = 0.001;        // V/s

    double step_duration() const { return step_size / scan_rate; }
};

// Throws Error{InvalidParameters} naming the first offending field.
void validate(const DpvParameters& params);

enum class Phase { Equilibrium, Base, Pulse };

const char* to_string(Phase phase);

struct Segment {
    double start_time; // s
    double duration;   // s
    double potential;  // V
    Phase phase;
};

struct PotentialWaveform {
    std::vector<Segment> segments;
    double total_duration = 0.0;

    /// Potential applied at time `t` (seconds since the start of
    /// equilibration). Segments are half-open; `t == total_duration`
    /// maps to the last segment. Throws InvalidParameters outside
    /// [0, total_duration].
    double potential_at(double t) const;
};

enum class SampleKind { BeforePulse, AfterPulse };

const char* to_string(SampleKind kind);

struct SampleInstant {
    double time;
    SampleKind kind;
};

/// round(|end - start| / step_size)
std::size_t step_count(const DpvParameters& params);

/// Equilibrium segment followed by one base/pulse pair per step. The pulse
/// occupies the final `pulse_width` seconds of each step.
PotentialWaveform generate_waveform(const DpvParameters& params);

/// Current sampling instants: the end of each base phase (before the pulse)
/// and the end of each pulse phase (after the pulse).
std::vector<SampleInstant> sample_instants(const DpvParameters& params);

/// Scan duration excluding equilibration: step_count * step_size / scan_rate.
double scan_duration(const DpvParameters& params);

// CSV with header `time_s,potential_V,phase`: one row at the start of each
// segment plus a closing row at total_duration.
void write_waveform_csv(const PotentialWaveform& waveform, std::ostream& out);
void write_waveform_csv(const PotentialWaveform& waveform, const std::string& path);

// CSV with header `time_s,kind,potential_V`; potential is the value applied
// just before the instant.
void write_instants_csv(const PotentialWaveform& waveform,
                        const std::vector<SampleInstant>& instants,
                        std::ostream& out);

} // namespace protoneuro::dpv
