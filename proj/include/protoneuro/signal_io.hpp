#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace protoneuro {

namespace dpv {
struct PotentialWaveform;
}

enum class Unit { Microampere, Volt };

const char* to_string(Unit unit);
Unit unit_from_string(const std::string& s);

/// Sampled trace: strictly increasing times, finite values, at least one
/// sample. Validated on construction and immutable afterwards.
class TimeSeries {
public:
    TimeSeries(std::vector<double> times, std::vector<double> values,
               Unit unit = Unit::Microampere, std::string label = {});

    std::span<const double> times() const { return times_; }
    std::span<const double> values() const { return values_; }
    Unit unit() const { return unit_; }
    const std::string& label() const { return label_; }
    std::size_t size() const { return times_.size(); }
    double duration() const { return times_.back() - times_.front(); }

    TimeSeries with_label(std::string label) const;

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
    std::vector<double> times_;
    std::vector<double> values_;
    Unit unit_;
    std::string label_;
};

// CSV layout:
//   time_s,value
//   # unit=microampere
//   # label=<string>        (omitted when the label is empty)
//   <time>,<value>
//   ...
// Comment lines may appear anywhere after the header. Numbers are written in
// the shortest form that parses back to the identical double.
TimeSeries read_timeseries_csv(std::istream& in, const std::string& source = "<stream>");
TimeSeries read_timeseries_csv(const std::string& path);
void write_timeseries_csv(const TimeSeries& series, std::ostream& out);
void write_timeseries_csv(const TimeSeries& series, const std::string& path);

// Segment-start samples of a DPV waveform as a volt-valued series.
TimeSeries waveform_to_timeseries(const dpv::PotentialWaveform& waveform,
                                  std::string label = "dpv");

/// Recipe for a synthetic current trace with Gaussian spikes.
///
/// Either `spike_times` is given explicitly, or `count` spikes are placed with
/// inter-spike intervals mean_isi * (1 + jitter_fraction * u), u ~ U[-1, 1],
/// rescaled so their mean is exactly `mean_isi`, and the train is centred in
/// [0, duration]. `spike_half_width` is the half width at half maximum.
struct SyntheticSpikeSpec {
    double duration = 1000.0;              // s
    std::optional<std::vector<double>> spike_times; // s
    std::size_t count = 0;
    double mean_isi = 10.0;                // s
    double jitter_fraction = 0.0;          // [0, 1)
    double spike_amplitude = 0.001;        // uA
    double spike_half_width = 1.0;         // s
    double baseline = 0.0;                 // uA
    double noise_sd = 0.0;                 // uA
    double sample_interval = 1.0;          // s
    std::uint64_t seed = 0;
    std::string label;
};

void validate(const SyntheticSpikeSpec& spec);

// Spike centres for a synthetic spec (explicit list or seeded placement).
std::vector<double> planned_spike_times(const SyntheticSpikeSpec& spec);

TimeSeries synthesize_spiky_series(const SyntheticSpikeSpec& spec);

} // namespace protoneuro
