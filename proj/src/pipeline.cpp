#include "protoneuro/pipeline.hpp"

#include "protoneuro/random.hpp"

#include <future>

namespace protoneuro {

int PipelineResult::exit_code() const
{
    return failures.empty() ? 0 : protoneuro::exit_code(failures.front().kind);
}

namespace {

struct SampleOutcome {
    std::optional<TimeSeries> series;
    std::optional<SpikeStats> stats;
    std::optional<SampleFailure> failure;
};

SampleOutcome analyse_sample(const std::string& label, const std::filesystem::path& path,
                             const SpikeDetectionConfig& detection)
{
    SampleOutcome out;
    try {
        auto series = read_timeseries_csv(path.string()).with_label(label);
        out.stats = compute_stats(detect_spikes(series, detection));
        out.series = std::move(series);
    } catch (const Error& e) {
        out.failure = SampleFailure{label, e.kind(), e.what()};
    }
    return out;
}

} // namespace

PipelineResult run_pipeline(const ExperimentManifest& manifest)
{
    const std::size_t samples = manifest.sample_labels.size();
    std::vector<std::future<SampleOutcome>> jobs;
    jobs.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i)
        jobs.push_back(std::async(std::launch::async, analyse_sample,
                                  std::cref(manifest.sample_labels[i]),
                                  std::cref(manifest.source_files[i]),
                                  std::cref(manifest.detection)));

    PipelineResult result;
    std::vector<SampleOutcome> outcomes;
    for (auto& j : jobs)
        outcomes.push_back(j.get());

    nlohmann::ordered_json per_sample = nlohmann::ordered_json::array();
    const TimeSeries* reference = nullptr;
    for (std::size_t i = 0; i < samples; ++i) {
        auto& o = outcomes[i];
        if (o.failure) {
            result.failures.push_back(*o.failure);
            per_sample.push_back({{"label", o.failure->label},
                                  {"error", to_string(o.failure->kind)},
                                  {"message", o.failure->message}});
            continue;
        }
        result.stats.push_back(*o.stats);
        per_sample.push_back(to_json(*o.stats));
        if (!reference)
            reference = &*o.series;
    }

    auto& report = result.report;
    report["manifest"] = to_json(manifest);
    report["samples"] = std::move(per_sample);
    if (!result.stats.empty()) {
        result.aggregate = aggregate_stats(result.stats);
        report["aggregate"] = to_json(*result.aggregate);
    } else {
        report["aggregate"] = nullptr;
    }

    const auto source = manifest.weights.value_or(manifest.coding.neuron_count == 10
                                                      ? WeightSource::Table1
                                                      : WeightSource::Seeded);
    try {
        if (source == WeightSource::Table1) {
            if (manifest.coding.neuron_count != 10)
                throw Error(ErrorKind::Validation, "table1 weights need coding.neuron_count = 10");
            result.weights = coding::table1_fixture();
        } else {
            result.weights = coding::init_weights(manifest.coding.neuron_count,
                                                  derive_seed(manifest.seed, "coding.weights"));
        }

        if (reference) {
            // Failed samples keep their neuron slot as a silent trace.
            std::vector<TimeSeries> traces;
            for (std::size_t i = 0; i < samples; ++i) {
                if (outcomes[i].series)
                    traces.push_back(*outcomes[i].series);
                else
                    traces.emplace_back(
                        std::vector<double>(reference->times().begin(), reference->times().end()),
                        std::vector<double>(reference->size(), 0.0), reference->unit(),
                        manifest.sample_labels[i]);
            }
            auto stacked = coding::stack_traces(traces, manifest.coding.neuron_count,
                                                manifest.coding.sample_count);
            result.codes = coding::encode(stacked.values, manifest.coding,
                                          std::move(stacked.labels), stacked.time_base);
            result.grid = coding::psi_ppi(*result.weights, *result.codes);
        }
    } catch (const Error& e) {
        result.failures.push_back({"<coding>", e.kind(), e.what()});
    }

    report["weights_source"] = source == WeightSource::Table1 ? "table1" : "seeded";
    report["weights"] = result.weights ? coding::to_json(*result.weights) : nullptr;
    report["codes"] = result.codes ? coding::to_json(*result.codes) : nullptr;
    report["psi_ppi"] = result.grid ? coding::to_json(*result.grid) : nullptr;
    if (result.grid && result.weights) {
        // One propagation step from each neuron's majority code.
        coding::BinaryVector active(result.codes->neurons());
        for (Eigen::Index j = 0; j < active.size(); ++j)
            active(j) = 2 * result.codes->entries.row(j).cast<int>().sum() >
                                result.codes->steps()
                            ? 1
                            : 0;
        const Eigen::VectorXi in = active.cast<int>();
        const Eigen::VectorXi fired =
            coding::fire_step(active, *result.weights, manifest.fire_threshold).cast<int>();
        report["fire_step"] = {{"fire_threshold", manifest.fire_threshold},
                               {"input", std::vector<int>(in.begin(), in.end())},
                               {"output", std::vector<int>(fired.begin(), fired.end())}};
    } else {
        report["fire_step"] = nullptr;
    }

    nlohmann::ordered_json failures = nlohmann::ordered_json::array();
    for (const auto& f : result.failures)
        failures.push_back(
            {{"label", f.label}, {"error", to_string(f.kind)}, {"message", f.message}});
    report["failures"] = std::move(failures);
    report["status"] = result.exit_code();
    return result;
}

} // namespace protoneuro
