#pragma once

#include "protoneuro/signal_io.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace protoneuro {

/// Peak-picking rule: a spike is a local maximum strictly above `threshold`;
/// retained spikes are at least `min_peak_distance` seconds apart.
struct SpikeDetectionConfig {
    double threshold = 0.0005;      // series unit (uA for current traces)
    double min_peak_distance = 5.0; // s

    friend bool operator==(const SpikeDetectionConfig&, const SpikeDetectionConfig&) = default;
};

void validate(const SpikeDetectionConfig& config);

struct SpikeTrain {
    std::vector<double> spike_times;
    std::vector<double> spike_amplitudes;
    std::string source_label;
    double duration = 0.0;
    SpikeDetectionConfig detection;

    std::size_t size() const { return spike_times.size(); }
    friend bool operator==(const SpikeTrain&, const SpikeTrain&) = default;
};

struct SpikeStats {
    std::string label;
    std::size_t count = 0;
    std::optional<double> mean_isi;      // s, needs at least two spikes
    std::optional<double> frequency_mhz; // 1000 / mean_isi
    double duration = 0.0;
};

struct AggregateStats {
    double mean_count = 0.0;
    std::optional<double> mean_isi_of_means; // over samples with a defined ISI
    std::size_t samples = 0;
};

/// Detect spikes in O(n + k log k).
///
/// Candidates are local maxima whose value exceeds the threshold. A plateau
/// of equal samples counts once, at its first sample, when both flanks are
/// lower. Endpoints are never peaks. Candidates are then accepted in order of
/// decreasing amplitude (earlier first on ties), discarding any candidate
/// closer than `min_peak_distance` to one already accepted. The result is
/// sorted by time.
SpikeTrain detect_spikes(const TimeSeries& series, const SpikeDetectionConfig& config);

// Quadratic reference implementation of the same rule: exhaustive candidate
// enumeration, then repeated selection of the global maximum.
SpikeTrain detect_spikes_naive(const TimeSeries& series, const SpikeDetectionConfig& config);

SpikeStats compute_stats(const SpikeTrain& train);

AggregateStats aggregate_stats(std::span<const SpikeStats> stats);

void write_spike_train_csv(const SpikeTrain& train, std::ostream& out);
void write_spike_train_csv(const SpikeTrain& train, const std::string& path);

nlohmann::ordered_json to_json(const SpikeStats& stats);
nlohmann::ordered_json to_json(const AggregateStats& stats);

} // namespace protoneuro
