#include "protoneuro/spike_analysis.hpp"

#include "protoneuro/error.hpp"
#include "text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>

namespace protoneuro {

void validate(const SpikeDetectionConfig& config)
{
    if (!std::isfinite(config.threshold))
        throw Error(ErrorKind::Validation, "detection threshold must be finite");
    if (!(std::isfinite(config.min_peak_distance) && config.min_peak_distance >= 0.0))
        throw Error(ErrorKind::Validation, "min_peak_distance must be >= 0");
}

namespace {

SpikeTrain make_train(const TimeSeries& series, const SpikeDetectionConfig& config,
                      std::vector<std::size_t> kept)
{
    std::sort(kept.begin(), kept.end());
    SpikeTrain train;
    train.source_label = series.label();
    train.duration = series.duration();
    train.detection = config;
    train.spike_times.reserve(kept.size());
    train.spike_amplitudes.reserve(kept.size());
    for (auto i : kept) {
        train.spike_times.push_back(series.times()[i]);
        train.spike_amplitudes.push_back(series.values()[i]);
    }
    return train;
}

} // namespace

SpikeTrain detect_spikes(const TimeSeries& series, const SpikeDetectionConfig& config)
{
    validate(config);
    const auto x = series.values();
    const auto t = series.times();
    const std::size_t n = x.size();

    std::vector<std::size_t> candidates;
    std::size_t i = 1;
    while (i + 1 < n) {
        if (x[i] > x[i - 1]) {
            std::size_t j = i;
            while (j + 1 < n && x[j + 1] == x[i])
                ++j;
            if (j + 1 < n && x[j + 1] < x[i] && x[i] > config.threshold)
                candidates.push_back(i);
            i = j + 1;
        } else {
            ++i;
        }
    }

    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });

    const double d = config.min_peak_distance;
    std::set<double> accepted_times;
    std::vector<std::size_t> kept;
    for (auto c : candidates) {
        const double tc = t[c];
        auto above = accepted_times.lower_bound(tc);
        if (above != accepted_times.end() && *above - tc < d)
            continue;
        if (above != accepted_times.begin() && tc - *std::prev(above) < d)
            continue;
        accepted_times.insert(tc);
        kept.push_back(c);
    }
    return make_train(series, config, std::move(kept));
}

SpikeTrain detect_spikes_naive(const TimeSeries& series, const SpikeDetectionConfig& config)
{
    validate(config);
    const auto x = series.values();
    const auto t = series.times();
    const std::size_t n = x.size();

    auto is_peak = [&](std::size_t i) {
        if (i == 0 || i + 1 >= n || !(x[i - 1] < x[i]))
            return false;
        for (std::size_t k = i + 1; k < n; ++k)
            if (x[k] != x[i])
                return x[k] < x[i];
        return false;
    };

    std::vector<std::size_t> remaining;
    for (std::size_t i = 0; i < n; ++i)
        if (x[i] > config.threshold && is_peak(i))
            remaining.push_back(i);

    std::vector<std::size_t> kept;
    while (!remaining.empty()) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < remaining.size(); ++k)
            if (x[remaining[k]] > x[remaining[best]])
                best = k;
        const std::size_t winner = remaining[best];
        kept.push_back(winner);
        std::vector<std::size_t> next;
        for (auto r : remaining)
            if (r != winner && std::abs(t[r] - t[winner]) >= config.min_peak_distance)
                next.push_back(r);
        remaining = std::move(next);
    }
    return make_train(series, config, std::move(kept));
}

SpikeStats compute_stats(const SpikeTrain& train)
{
    SpikeStats stats;
    stats.label = train.source_label;
    stats.count = train.spike_times.size();
    stats.duration = train.duration;
    if (stats.count >= 2) {
        // Consecutive differences telescope, but summing them keeps the
        // definition literal.
        double sum = 0.0;
        for (std::size_t i = 1; i < stats.count; ++i)
            sum += train.spike_times[i] - train.spike_times[i - 1];
        const double isi = sum / static_cast<double>(stats.count - 1);
        stats.mean_isi = isi;
        stats.frequency_mhz = 1000.0 / isi;
    }
    return stats;
}

AggregateStats aggregate_stats(std::span<const SpikeStats> stats)
{
    if (stats.empty())
        throw Error(ErrorKind::EmptyInput, "aggregate_stats needs at least one sample");
    AggregateStats agg;
    agg.samples = stats.size();
    double count_sum = 0.0, isi_sum = 0.0;
    std::size_t isi_n = 0;
    for (const auto& s : stats) {
        count_sum += static_cast<double>(s.count);
        if (s.mean_isi) {
            isi_sum += *s.mean_isi;
            ++isi_n;
        }
    }
    agg.mean_count = count_sum / static_cast<double>(stats.size());
    if (isi_n > 0)
        agg.mean_isi_of_means = isi_sum / static_cast<double>(isi_n);
    return agg;
}

void write_spike_train_csv(const SpikeTrain& train, std::ostream& out)
{
    out << "spike_time_s,amplitude\n";
    for (std::size_t i = 0; i < train.size(); ++i)
        out << detail::format_shortest(train.spike_times[i]) << ','
            << detail::format_shortest(train.spike_amplitudes[i]) << '\n';
}

void write_spike_train_csv(const SpikeTrain& train, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
    write_spike_train_csv(train, out);
    if (!out)
        throw Error(ErrorKind::Io, "write failed: " + path);
}

nlohmann::ordered_json to_json(const SpikeStats& stats)
{
    nlohmann::ordered_json j;
    j["label"] = stats.label;
    j["count"] = stats.count;
    j["mean_isi_s"] = stats.mean_isi ? nlohmann::ordered_json(*stats.mean_isi) : nullptr;
    j["frequency_mhz"] =
        stats.frequency_mhz ? nlohmann::ordered_json(*stats.frequency_mhz) : nullptr;
    j["duration_s"] = stats.duration;
    return j;
}

nlohmann::ordered_json to_json(const AggregateStats& stats)
{
    nlohmann::ordered_json j;
    j["samples"] = stats.samples;
    j["mean_count"] = stats.mean_count;
    j["mean_isi_of_means_s"] = stats.mean_isi_of_means
                                   ? nlohmann::ordered_json(*stats.mean_isi_of_means)
                                   : nullptr;
    return j;
}

} // namespace protoneuro
