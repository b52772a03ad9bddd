#include "protoneuro/error.hpp"
#include "protoneuro/spike_analysis.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace protoneuro;
namespace pt = protoneuro::testing;

namespace {

TimeSeries series(std::vector<double> values)
{
    const auto n = values.size();
    return TimeSeries(pt::iota_times(n), std::move(values));
}

const SpikeDetectionConfig kDefault{};

} // namespace

TEST(DetectSpikes, FlatSeries)
{
    const auto s = series(std::vector<double>(200, 0.0));
    EXPECT_EQ(detect_spikes(s, kDefault).size(), 0u);
    EXPECT_EQ(detect_spikes_naive(s, kDefault).size(), 0u);
}

TEST(DetectSpikes, ThreeBumps)
{
    const auto s = series(pt::bumps(41, {{10, 0.001}, {20, 0.001}, {30, 0.001}}));
    const auto train = detect_spikes(s, kDefault);
    EXPECT_EQ(train.spike_times, (std::vector<double>{10, 20, 30}));
    EXPECT_EQ(train, detect_spikes_naive(s, kDefault));
    for (double a : train.spike_amplitudes)
        EXPECT_NEAR(a, 0.001, 1e-12);
    EXPECT_DOUBLE_EQ(train.duration, 40.0);
}

TEST(DetectSpikes, CloserPeakWithSmallerAmplitudeIsDropped)
{
    const auto s = series(pt::bumps(30, {{10, 0.002}, {13, 0.001}}));
    const auto train = detect_spikes(s, kDefault);
    EXPECT_EQ(train.spike_times, std::vector<double>{10});
    EXPECT_EQ(train, detect_spikes_naive(s, kDefault));
}

TEST(DetectSpikes, ThresholdIsStrict)
{
    auto v = std::vector<double>(11, 0.0);
    v[5] = 0.0005;
    EXPECT_EQ(detect_spikes(series(v), kDefault).size(), 0u);
    v[5] = 0.00050001;
    EXPECT_EQ(detect_spikes(series(v), kDefault).size(), 1u);
}

TEST(DetectSpikes, EndpointsAndPlateaus)
{
    // Endpoint maxima are ignored.
    EXPECT_EQ(detect_spikes(series({1, 0, 0, 0, 1}), {0.5, 0.0}).size(), 0u);
    // A plateau counts once at its first sample.
    const auto t = detect_spikes(series({0, 1, 1, 1, 0}), {0.5, 0.0});
    EXPECT_EQ(t.spike_times, std::vector<double>{1});
    // A rising shoulder is not a peak.
    EXPECT_EQ(detect_spikes(series({0, 1, 1, 2, 0}), {0.5, 0.0}).spike_times,
              std::vector<double>{3});
}

TEST(DetectSpikes, EqualAmplitudeTiesKeepEarlier)
{
    const auto s = series({0, 1, 0, 1, 0, 1, 0});
    const auto t = detect_spikes(s, {0.5, 2.5});
    EXPECT_EQ(t.spike_times, (std::vector<double>{1, 5}));
    EXPECT_EQ(t, detect_spikes_naive(s, {0.5, 2.5}));
}

TEST(DetectSpikes, DistanceExactlyMinimumIsAllowed)
{
    const auto s = series(pt::bumps(30, {{10, 0.001}, {15, 0.002}}));
    EXPECT_EQ(detect_spikes(s, kDefault).size(), 2u);
}

TEST(DetectSpikes, InvalidConfig)
{
    const auto s = series({0, 1, 0});
    EXPECT_THROW(detect_spikes(s, {NAN, 1.0}), Error);
    EXPECT_THROW(detect_spikes(s, {0.0, -1.0}), Error);
}

// Property: the fast detector equals the quadratic reference; the result is
// sorted, above threshold and respects the minimum distance.
TEST(DetectSpikes, MatchesNaiveOnRandomSignals)
{
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 100 + static_cast<std::size_t>(u(gen) * 2000);
        std::vector<double> v(n);
        const bool quantised = trial % 4 == 0;
        for (auto& x : v) {
            x = u(gen);
            if (quantised)
                x = std::floor(x * 4.0) / 4.0;
        }
        const SpikeDetectionConfig cfg{u(gen), std::floor(u(gen) * 20.0)};
        const auto s = series(v);
        const auto fast = detect_spikes(s, cfg);
        ASSERT_EQ(fast, detect_spikes_naive(s, cfg)) << "trial " << trial;
        for (std::size_t i = 0; i < fast.size(); ++i) {
            EXPECT_GT(fast.spike_amplitudes[i], cfg.threshold);
            if (i > 0) {
                EXPECT_GE(fast.spike_times[i] - fast.spike_times[i - 1], cfg.min_peak_distance);
            }
        }
    }
}

TEST(ComputeStats, Table2Frequencies)
{
    SpikeTrain t;
    for (int i = 0; i < 726; ++i)
        t.spike_times.push_back(5.0 + 22.24 * i);
    auto s = compute_stats(t);
    ASSERT_TRUE(s.frequency_mhz);
    EXPECT_NEAR(*s.mean_isi, 22.24, 1e-9);
    EXPECT_LE(pt::rel_err(*s.frequency_mhz, 44.97), 1e-3);
    EXPECT_NEAR(*s.frequency_mhz, 44.964, 1e-3);

    t.spike_times.clear();
    for (int i = 0; i < 900; ++i)
        t.spike_times.push_back(12.32 * i);
    s = compute_stats(t);
    EXPECT_LE(pt::rel_err(*s.frequency_mhz, 81.15), 1e-3);
    EXPECT_NEAR(*s.frequency_mhz, 81.169, 1e-3);
}

TEST(ComputeStats, SingleAndNoSpike)
{
    SpikeTrain t;
    t.source_label = "x";
    auto s = compute_stats(t);
    EXPECT_EQ(s.count, 0u);
    EXPECT_FALSE(s.mean_isi);
    t.spike_times = {3.0};
    s = compute_stats(t);
    EXPECT_EQ(s.count, 1u);
    EXPECT_FALSE(s.mean_isi);
    EXPECT_FALSE(s.frequency_mhz);
    EXPECT_EQ(s.label, "x");
    EXPECT_TRUE(to_json(s)["mean_isi_s"].is_null());
}

TEST(AggregateStats, Table2Columns)
{
    const double counts[] = {726, 359, 210, 382, 555, 195, 29, 779, 28, 8, 900, 12};
    const double isis[] = {22.24, 50.48,  85.75,  42.21,   32.71, 77.29,
                           544.68, 20.71, 666.11, 2541.00, 12.32, 1412.55};
    std::vector<SpikeStats> stats;
    for (int i = 0; i < 12; ++i)
        stats.push_back({"s" + std::to_string(i), static_cast<std::size_t>(counts[i]), isis[i],
                         1000.0 / isis[i], 0.0});
    const auto agg = aggregate_stats(stats);
    EXPECT_EQ(agg.samples, 12u);
    EXPECT_NEAR(agg.mean_count, 348.5833, 1e-4);
    ASSERT_TRUE(agg.mean_isi_of_means);
    EXPECT_NEAR(*agg.mean_isi_of_means, 459.00417, 1e-4);
}

TEST(AggregateStats, EchoesSingleElementAndSkipsUndefined)
{
    std::vector<SpikeStats> one{{"a", 7, 3.5, 1000.0 / 3.5, 30.0}};
    auto agg = aggregate_stats(one);
    EXPECT_EQ(agg.mean_count, 7.0);
    EXPECT_EQ(agg.mean_isi_of_means, 3.5);

    one.push_back({"b", 1, std::nullopt, std::nullopt, 30.0});
    agg = aggregate_stats(one);
    EXPECT_EQ(agg.mean_count, 4.0);
    EXPECT_EQ(agg.mean_isi_of_means, 3.5);

    try {
        aggregate_stats({});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptyInput);
    }
}

TEST(SpikeTrainCsv, Layout)
{
    SpikeTrain t;
    t.spike_times = {1.5, 10};
    t.spike_amplitudes = {0.001, 0.002};
    std::ostringstream out;
    write_spike_train_csv(t, out);
    EXPECT_EQ(out.str(), "spike_time_s,amplitude\n1.5,0.001\n10,0.002\n");
}
