#include "protoneuro/config.hpp"
#include "protoneuro/error.hpp"
#include "protoneuro/pipeline.hpp"
#include "protoneuro/random.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

using namespace protoneuro;
namespace pt = protoneuro::testing;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an error";
    return ErrorKind::Io;
}

void write_surrogate(const fs::path& path, std::size_t count, double mean_isi, double duration,
                     std::uint64_t seed)
{
    SyntheticSpikeSpec spec;
    spec.count = count;
    spec.mean_isi = mean_isi;
    spec.jitter_fraction = 0.2;
    spec.duration = duration;
    spec.noise_sd = 1e-5;
    spec.seed = seed;
    write_timeseries_csv(synthesize_spiky_series(spec), path.string());
}

} // namespace

TEST(DeriveSeed, DistinctComponentsAndStable)
{
    EXPECT_EQ(derive_seed(1, "a"), derive_seed(1, "a"));
    EXPECT_NE(derive_seed(1, "a"), derive_seed(1, "b"));
    EXPECT_NE(derive_seed(1, "a"), derive_seed(2, "a"));
}

TEST(Rng, UniformAndNormalMoments)
{
    Rng rng(123);
    double sum = 0.0, sq = 0.0, nsum = 0.0, nsq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sq += u * u;
        const double g = rng.normal();
        nsum += g;
        nsq += g * g;
    }
    EXPECT_NEAR(sum / n, 0.5, 0.005);
    EXPECT_NEAR(sq / n - 0.25, 1.0 / 12.0, 0.002);
    EXPECT_NEAR(nsum / n, 0.0, 0.01);
    EXPECT_NEAR(nsq / n, 1.0, 0.01);
}

TEST(RunConfig, DefaultsAndOverrides)
{
    const auto c = run_config_from_json(nlohmann::json::parse(R"({
        "seed": 17, "output_dir": "out",
        "dpv": {"step_size": 0.002},
        "detection": {"min_peak_distance": 3},
        "coding": {"neuron_count": 4, "sample_count": 100},
        "lif": {"tau_m": 0.01},
        "synth": {"count": 5}
    })"));
    EXPECT_EQ(c.seed, 17u);
    EXPECT_EQ(c.output_dir, "out");
    EXPECT_EQ(c.dpv.step_size, 0.002);
    EXPECT_EQ(c.dpv.scan_rate, 0.001);
    EXPECT_EQ(c.detection.min_peak_distance, 3.0);
    EXPECT_EQ(c.detection.threshold, 0.0005);
    EXPECT_EQ(c.coding.neuron_count, 4u);
    EXPECT_EQ(c.coding.sample_count, 100u);
    EXPECT_EQ(c.lif.tau_m, 0.01);
    EXPECT_EQ(c.sections["synth"]["count"], 5);
    EXPECT_NO_THROW(validate(c));
    EXPECT_EQ(synth_from_json(c.sections["synth"]).count, 5u);
}

TEST(RunConfig, Errors)
{
    EXPECT_EQ(kind_of([] { run_config_from_json(nlohmann::json::array()); }), ErrorKind::Parse);
    EXPECT_EQ(kind_of([] { run_config_from_json({{"dpv", 3}}); }), ErrorKind::Parse);
    EXPECT_EQ(kind_of([] { run_config_from_json({{"dpv", {{"step_size", "x"}}}}); }),
              ErrorKind::Parse);
    EXPECT_EQ(kind_of([] { run_config_from_json({{"coding", {{"neuron_count", 0}}}}); }),
              ErrorKind::Validation);
    auto c = run_config_from_json({{"dpv", {{"step_size", 0.0}}}});
    EXPECT_EQ(kind_of([&] { validate(c); }), ErrorKind::InvalidParameters);
    EXPECT_EQ(kind_of([] { load_run_config("/nonexistent/config.json"); }), ErrorKind::Io);
}

TEST(SeedFromEnvironment, ParsesOrRejects)
{
    ::unsetenv("PROTONEURO_SEED");
    EXPECT_FALSE(seed_from_environment());
    ::setenv("PROTONEURO_SEED", "42", 1);
    EXPECT_EQ(seed_from_environment(), 42u);
    ::setenv("PROTONEURO_SEED", "-3", 1);
    EXPECT_EQ(kind_of([] { seed_from_environment(); }), ErrorKind::Validation);
    ::unsetenv("PROTONEURO_SEED");
}

TEST(Manifest, Validation)
{
    const auto dir = pt::temp_dir("manifest_validation");
    write_surrogate(dir / "a.csv", 5, 10.0, 100.0, 1);
    EXPECT_EQ(kind_of([&] {
                  manifest_from_json({{"sample_labels", {"a"}}, {"source_files", {"missing.csv"}}}, dir);
              }),
              ErrorKind::Io);
    EXPECT_EQ(kind_of([&] {
                  manifest_from_json({{"sample_labels", {"a", "a"}},
                                      {"source_files", {"a.csv", "a.csv"}}},
                                     dir);
              }),
              ErrorKind::Validation);
    EXPECT_EQ(kind_of([&] {
                  manifest_from_json({{"sample_labels", {"a"}}, {"source_files", {}}}, dir);
              }),
              ErrorKind::Validation);
    EXPECT_EQ(kind_of([&] {
                  manifest_from_json({{"sample_labels", {"a", "b"}},
                                      {"source_files", {"a.csv", "a.csv"}},
                                      {"coding", {{"neuron_count", 1}}}},
                                     dir);
              }),
              ErrorKind::Validation);
    EXPECT_EQ(kind_of([&] {
                  manifest_from_json(
                      {{"sample_labels", {"a"}}, {"source_files", {"a.csv"}}, {"weights", "x"}}, dir);
              }),
              ErrorKind::Validation);

    const auto m = manifest_from_json(
        {{"sample_labels", {"a"}}, {"source_files", {"a.csv"}}, {"seed", 5}, {"weights", "seeded"}},
        dir);
    EXPECT_EQ(m.source_files.front(), dir / "a.csv");
    EXPECT_EQ(m.weights, WeightSource::Seeded);
    EXPECT_EQ(to_json(m)["source_files"][0], "a.csv");
}

TEST(Pipeline, SingleFlatSample)
{
    const auto dir = pt::temp_dir("pipeline_flat");
    write_timeseries_csv(TimeSeries(pt::iota_times(50), std::vector<double>(50, 0.0)),
                         (dir / "flat.csv").string());
    pt::spit(dir / "manifest.json",
             R"({"sample_labels": ["flat"], "source_files": ["flat.csv"]})");
    const auto r = run_pipeline(load_manifest(dir / "manifest.json"));
    EXPECT_EQ(r.exit_code(), 0);
    ASSERT_EQ(r.stats.size(), 1u);
    EXPECT_EQ(r.stats[0].count, 0u);
    ASSERT_TRUE(r.grid);
    EXPECT_EQ(r.grid->grid.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(r.report["weights_source"], "table1");
    EXPECT_EQ(r.report["samples"][0]["count"], 0);
    EXPECT_TRUE(r.report["samples"][0]["mean_isi_s"].is_null());
    EXPECT_EQ(r.codes->neurons(), 10);
    EXPECT_EQ(r.codes->steps(), 50);
}

TEST(Pipeline, TwelveSurrogatesAggregateAndDeterminism)
{
    const auto dir = pt::temp_dir("pipeline_twelve");
    const struct {
        const char* label;
        std::size_t count;
        double isi;
    } rows[] = {
        {"L-Glu:L-Asp", 726, 22.24},      {"L-Glu:L-Asp:L-Phe", 359, 50.48},
        {"L-Lys:L-Phe:L-Glu", 210, 85.75}, {"L-Glu:L-Phe:L-His", 382, 42.21},
        {"L-Glu:L-Phe:PLLA", 555, 32.71},  {"L-Lys:L-Phe:L-His:PLLA", 195, 77.29},
        {"L-Glu:L-Arg", 29, 544.68},       {"L-Asp", 779, 20.71},
        {"L-Phe:L-Lys", 28, 666.11},       {"L-Glu:L-Asp:L-Pro", 8, 2541.00},
        {"L-Phe", 900, 12.32},             {"L-Glu:L-Phe", 12, 1412.55},
    };
    nlohmann::json manifest = {{"seed", 11},
                               {"coding", {{"neuron_count", 12}}},
                               {"weights", "seeded"}};
    std::uint64_t k = 0;
    for (const auto& row : rows) {
        const auto file = "s" + std::to_string(k) + ".csv";
        write_surrogate(dir / file, row.count, row.isi, 18400.0, derive_seed(11, row.label));
        manifest["sample_labels"].push_back(row.label);
        manifest["source_files"].push_back(file);
        ++k;
    }
    pt::spit(dir / "manifest.json", manifest.dump());

    const auto a = run_pipeline(load_manifest(dir / "manifest.json"));
    ASSERT_EQ(a.exit_code(), 0) << a.report.dump(2);
    ASSERT_TRUE(a.aggregate);
    EXPECT_LT(pt::rel_err(a.aggregate->mean_count, 348.58), 0.02);
    for (std::size_t i = 0; i < 12; ++i)
        EXPECT_EQ(a.stats[i].count, rows[i].count) << rows[i].label;

    const auto b = run_pipeline(load_manifest(dir / "manifest.json"));
    EXPECT_EQ(a.report.dump(2), b.report.dump(2));
    EXPECT_EQ(a.report["weights_source"], "seeded");
    EXPECT_EQ(a.report["codes"]["neuron_labels"][11], "L-Glu:L-Phe");
}

TEST(Pipeline, UnreadableSampleIsReportedAndOthersContinue)
{
    const auto dir = pt::temp_dir("pipeline_partial");
    write_surrogate(dir / "good.csv", 20, 10.0, 300.0, 3);
    pt::spit(dir / "bad.csv", "time_s,value\n0,1\n0,2\n");
    pt::spit(dir / "manifest.json",
             R"({"sample_labels": ["good", "bad"], "source_files": ["good.csv", "bad.csv"]})");
    const auto r = run_pipeline(load_manifest(dir / "manifest.json"));
    ASSERT_EQ(r.failures.size(), 1u);
    EXPECT_EQ(r.failures[0].label, "bad");
    EXPECT_EQ(r.exit_code(), 2);
    EXPECT_EQ(r.report["status"], 2);
    ASSERT_EQ(r.stats.size(), 1u);
    EXPECT_EQ(r.stats[0].count, 20u);
    ASSERT_TRUE(r.codes);
    EXPECT_EQ(r.codes->entries.row(1).cast<int>().sum(), 0);
    EXPECT_EQ(r.report["samples"][1]["error"], "validation-error");
}
