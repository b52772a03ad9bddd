#include "protoneuro/cli.hpp"

#include "protoneuro/config.hpp"
#include "protoneuro/dpv_waveform.hpp"
#include "protoneuro/error.hpp"
#include "protoneuro/network_sim.hpp"
#include "protoneuro/pipeline.hpp"
#include "protoneuro/qsar_model.hpp"
#include "protoneuro/random.hpp"
#include "protoneuro/signal_io.hpp"
#include "protoneuro/spike_analysis.hpp"
#include "protoneuro/temporal_coding.hpp"
#include "text.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;

namespace protoneuro::cli {

namespace {

std::ofstream open_output(const fs::path& path)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec)
            throw Error(ErrorKind::Io, "cannot create directory " + path.parent_path().string());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const fs::path& path)
{
    out.flush();
    if (!out)
        throw Error(ErrorKind::Io, "write failed: " + path.string());
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn)
{
    auto out = open_output(path);
    fn(out);
    finish(out, path);
}

nlohmann::json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::Io, "cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
    }
}

std::string fmt(double v)
{
    return detail::format_sig9(v);
}

std::string fmt(const std::optional<double>& v)
{
    return v ? detail::format_sig9(*v) : "n/a";
}

template <typename T>
void override_with(T& target, const std::optional<T>& flag)
{
    if (flag)
        target = *flag;
}

// Options every subcommand accepts.
struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;

    void attach(CLI::App* sub)
    {
        sub->add_option("--config", config_path, "JSON run configuration file");
        sub->add_option("--seed", seed,
                        "Top-level seed; overrides PROTONEURO_SEED and the config file");
    }

    RunConfig load() const
    {
        RunConfig config = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        if (auto env = seed_from_environment())
            config.seed = *env;
        if (seed)
            config.seed = *seed;
        return config;
    }
};

struct WaveformArgs {
    Common common;
    std::string out, instants;
    std::optional<double> equilibrium_time, start, end, step, amplitude, width, rate;
};

struct SynthArgs {
    Common common;
    std::string out, label, spike_times;
    std::optional<double> duration, mean_isi, jitter, amplitude, half_width, baseline, noise_sd,
        sample_interval;
    std::optional<std::size_t> count;
};

struct DetectArgs {
    Common common;
    std::string input, train_out, stats_out;
    std::optional<double> threshold, min_distance;
};

struct EncodeArgs {
    Common common;
    std::vector<std::string> inputs;
    std::string out;
    std::optional<double> threshold;
    std::optional<std::size_t> neurons, sample_count;
};

struct WeightsArgs {
    Common common;
    bool table1 = false;
    std::optional<std::size_t> neurons;
    std::string out;
};

struct SimArgs {
    Common common;
    std::string spec, out_dir;
};

struct QsarFitArgs {
    Common common;
    std::string input, out;
    double level = 0.95;
};

struct QsarPredictArgs {
    Common common;
    std::string model, observations;
    std::optional<double> x, y;
    bool table3 = false;
};

struct PipelineArgs {
    Common common;
    std::string manifest, out_dir;
};

struct ReportArgs {
    Common common;
    std::string report;
    bool table3 = false;
};

int cmd_waveform(const WaveformArgs& a, std::ostream& out)
{
    auto config = a.common.load();
    auto& p = config.dpv;
    override_with(p.equilibrium_time, a.equilibrium_time);
    override_with(p.start_potential, a.start);
    override_with(p.end_potential, a.end);
    override_with(p.step_size, a.step);
    override_with(p.pulse_amplitude, a.amplitude);
    override_with(p.pulse_width, a.width);
    override_with(p.scan_rate, a.rate);
    dpv::validate(p);

    const auto waveform = dpv::generate_waveform(p);
    const fs::path path = a.out.empty() ? config.output_dir / "waveform.csv" : fs::path(a.out);
    write_file(path, [&](std::ostream& o) { dpv::write_waveform_csv(waveform, o); });
    if (!a.instants.empty()) {
        const auto instants = dpv::sample_instants(p);
        write_file(a.instants,
                   [&](std::ostream& o) { dpv::write_instants_csv(waveform, instants, o); });
    }
    out << "steps=" << dpv::step_count(p) << " scan_duration_s=" << fmt(dpv::scan_duration(p))
        << " total_duration_s=" << fmt(waveform.total_duration) << '\n';
    return 0;
}

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> values;
    for (auto f : detail::split_csv(text)) {
        if (f.empty())
            continue;
        auto v = detail::parse_double(f);
        if (!v)
            throw Error(ErrorKind::Validation, "--spike-times: malformed number '" +
                                                   std::string(f) + "'");
        values.push_back(*v);
    }
    return values;
}

int cmd_synth(const SynthArgs& a, std::ostream& out)
{
    auto config = a.common.load();
    SyntheticSpikeSpec spec = config.sections.contains("synth")
                                  ? synth_from_json(config.sections["synth"])
                                  : SyntheticSpikeSpec{};
    override_with(spec.duration, a.duration);
    override_with(spec.count, a.count);
    override_with(spec.mean_isi, a.mean_isi);
    override_with(spec.jitter_fraction, a.jitter);
    override_with(spec.spike_amplitude, a.amplitude);
    override_with(spec.spike_half_width, a.half_width);
    override_with(spec.baseline, a.baseline);
    override_with(spec.noise_sd, a.noise_sd);
    override_with(spec.sample_interval, a.sample_interval);
    if (!a.spike_times.empty())
        spec.spike_times = parse_list(a.spike_times);
    if (!a.label.empty())
        spec.label = a.label;
    spec.seed = derive_seed(config.seed, "synth");

    const auto series = synthesize_spiky_series(spec);
    const fs::path path = a.out.empty() ? config.output_dir / "synth.csv" : fs::path(a.out);
    write_file(path, [&](std::ostream& o) { write_timeseries_csv(series, o); });
    out << "samples=" << series.size() << " spikes=" << planned_spike_times(spec).size() << '\n';
    return 0;
}

int cmd_detect(const DetectArgs& a, std::ostream& out)
{
    auto config = a.common.load();
    override_with(config.detection.threshold, a.threshold);
    override_with(config.detection.min_peak_distance, a.min_distance);
    validate(config.detection);

    const auto series = read_timeseries_csv(a.input);
    const auto train = detect_spikes(series, config.detection);
    auto stats = compute_stats(train);
    if (stats.label.empty())
        stats.label = fs::path(a.input).stem().string();

    const auto stem = fs::path(a.input).stem().string();
    const fs::path train_path =
        a.train_out.empty() ? config.output_dir / (stem + "_spikes.csv") : fs::path(a.train_out);
    const fs::path stats_path =
        a.stats_out.empty() ? config.output_dir / (stem + "_stats.json") : fs::path(a.stats_out);
    write_file(train_path, [&](std::ostream& o) { write_spike_train_csv(train, o); });
    write_file(stats_path, [&](std::ostream& o) { o << to_json(stats).dump(2) << '\n'; });

    out << "count=" << stats.count << " mean_isi_s=" << fmt(stats.mean_isi)
        << " frequency_mhz=" << fmt(stats.frequency_mhz) << '\n';
    return 0;
}

int cmd_encode(const EncodeArgs& a, std::ostream& out)
{
    auto config = a.common.load();
    override_with(config.coding.threshold, a.threshold);
    override_with(config.coding.neuron_count, a.neurons);
    if (a.sample_count)
        config.coding.sample_count = a.sample_count;
    coding::validate(config.coding);

    std::vector<TimeSeries> traces;
    for (const auto& path : a.inputs) {
        auto tr = read_timeseries_csv(path);
        if (tr.label().empty())
            tr = tr.with_label(fs::path(path).stem().string());
        traces.push_back(std::move(tr));
    }
    auto stacked =
        coding::stack_traces(traces, config.coding.neuron_count, config.coding.sample_count);
    const auto codes = coding::encode(stacked.values, config.coding, std::move(stacked.labels),
                                      stacked.time_base);
    const fs::path path = a.out.empty() ? config.output_dir / "codes.csv" : fs::path(a.out);
    write_file(path, [&](std::ostream& o) { coding::write_code_matrix_csv(codes, o); });
    out << "neurons=" << codes.neurons() << " steps=" << codes.steps()
        << " active=" << codes.entries.cast<long>().sum() << '\n';
    return 0;
}

int cmd_weights(const WeightsArgs& a, std::ostream& out)
{
    auto config = a.common.load();
    override_with(config.coding.neuron_count, a.neurons);
    const auto weights =
        a.table1 ? coding::table1_fixture()
                 : coding::init_weights(config.coding.neuron_count,
                                        derive_seed(config.seed, "coding.weights"));
    if (a.out.empty()) {
        coding::write_weights_csv(weights, out);
    } else {
        write_file(a.out, [&](std::ostream& o) { coding::write_weights_csv(weights, o); });
        out << "neurons=" << weights.size() << '\n';
    }
    return 0;
}

nlohmann::json sim_spec(const SimArgs& a, const RunConfig& config, const char* section)
{
    if (!a.spec.empty())
        return read_json(a.spec);
    if (config.sections.contains(section))
        return config.sections[section];
    throw Error(ErrorKind::Validation,
                std::string("no network spec: pass --spec or add a '") + section +
                    "' section to the config");
}

int cmd_sim_spiking(const SimArgs& a, std::ostream& out)
{
    auto config = a.common.load();
    const auto run = sim::spiking_run_from_json(sim_spec(a, config, "sim_spiking"),
                                                derive_seed(config.seed, "sim.spiking"),
                                                config.lif);
    const auto trace = sim::run_spiking(run.net, run.drive);
    const fs::path dir = a.out_dir.empty() ? config.output_dir : fs::path(a.out_dir);
    write_file(dir / "trace.csv", [&](std::ostream& o) { sim::write_trace_csv(trace, o); });
    write_file(dir / "raster.csv", [&](std::ostream& o) { sim::write_raster_csv(trace, o); });
    write_file(dir / "output.csv", [&](std::ostream& o) { sim::write_output_csv(trace, o); });
    out << "neurons=" << run.net.neurons() << " steps=" << trace.times.size()
        << " spikes=" << trace.raster.size() << '\n';
    return 0;
}

int cmd_sim_rate(const SimArgs& a, std::ostream& out)
{
    auto config = a.common.load();
    const auto run = sim::rate_run_from_json(sim_spec(a, config, "sim_rate"),
                                             derive_seed(config.seed, "sim.rate"));
    const auto trace = sim::run_rate(run.net, run.drive, run.feedback);
    const fs::path dir = a.out_dir.empty() ? config.output_dir : fs::path(a.out_dir);
    write_file(dir / "trace.csv", [&](std::ostream& o) { sim::write_trace_csv(trace, o); });
    const double peak = trace.values.size() ? trace.values.cwiseAbs().maxCoeff() : 0.0;
    out << "units=" << run.net.units() << " steps=" << trace.times.size()
        << " max_abs_activity=" << fmt(peak) << '\n';
    return 0;
}

std::vector<qsar::QsarObservation> load_observations(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::Io, "cannot open " + path);
    return qsar::read_observations_csv(in, path);
}

int cmd_qsar_fit(const QsarFitArgs& a, std::ostream& out, std::ostream& err)
{
    auto config = a.common.load();
    const auto observations = load_observations(a.input);
    auto result = qsar::fit(observations);
    if (observations.size() > qsar::kTerms)
        result.coefficients.bounds = qsar::confidence_bounds(result, observations, a.level);
    else
        err << "warning: " << observations.size()
            << " observations leave no residual degrees of freedom; bounds omitted\n";

    auto j = qsar::to_json(result.coefficients);
    j["confidence_level"] = result.coefficients.bounds ? nlohmann::ordered_json(a.level) : nullptr;
    j["observations"] = result.observations;
    j["residual_sum_of_squares"] = result.residual_sum_of_squares;
    const fs::path path = a.out.empty() ? config.output_dir / "qsar_model.json" : fs::path(a.out);
    write_file(path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });

    for (std::size_t k = 0; k < qsar::kTerms; ++k) {
        out << qsar::kCoefficientNames[k] << '=' << fmt(result.coefficients.values[k]);
        if (result.coefficients.bounds)
            out << " [" << fmt((*result.coefficients.bounds)[k].low) << ", "
                << fmt((*result.coefficients.bounds)[k].high) << ']';
        out << '\n';
    }
    out << "rss=" << fmt(result.residual_sum_of_squares) << '\n';
    return 0;
}

int cmd_qsar_predict(const QsarPredictArgs& a, std::ostream& out)
{
    a.common.load();
    const auto coeffs = a.model.empty() ? qsar::published_coefficients()
                                        : qsar::coefficients_from_json(read_json(a.model));
    bool did_something = false;
    if (a.x || a.y) {
        if (!a.x || !a.y)
            throw Error(ErrorKind::Validation, "--x and --y must be given together");
        out << "rate_hz=" << fmt(qsar::predict(coeffs, *a.x, *a.y)) << '\n';
        did_something = true;
    }
    if (!a.observations.empty()) {
        out << "label,mean_hz,predicted_hz,deviation_percent\n";
        for (const auto& o : load_observations(a.observations)) {
            const double pred =
                qsar::predict(coeffs, o.predictors.molecular_weight, o.predictors.peptide_length);
            out << o.predictors.label << ',' << fmt(o.mean_firing_rate) << ',' << fmt(pred) << ','
                << fmt(qsar::percent_deviation(o.mean_firing_rate, pred)) << '\n';
        }
        did_something = true;
    }
    if (a.table3) {
        out << "label,mean_hz,predicted_hz,deviation_percent\n";
        for (const auto& row : qsar::table3())
            out << row.label << ',' << fmt(row.mean_firing_rate) << ',' << fmt(row.predicted)
                << ',' << fmt(qsar::percent_deviation(row.mean_firing_rate, row.predicted))
                << '\n';
        did_something = true;
    }
    if (!did_something)
        throw Error(ErrorKind::Validation, "give --x/--y, --observations or --table3");
    return 0;
}

int cmd_pipeline(const PipelineArgs& a, std::ostream& out, std::ostream& err)
{
    auto config = a.common.load();
    auto manifest = load_manifest(a.manifest);
    if (auto env = seed_from_environment())
        manifest.seed = *env;
    if (a.common.seed)
        manifest.seed = *a.common.seed;

    const auto result = run_pipeline(manifest);
    const fs::path dir = a.out_dir.empty() ? config.output_dir : fs::path(a.out_dir);
    write_file(dir / "report.json", [&](std::ostream& o) { o << result.report.dump(2) << '\n'; });
    if (result.codes)
        write_file(dir / "codes.csv",
                   [&](std::ostream& o) { coding::write_code_matrix_csv(*result.codes, o); });
    if (result.grid) {
        const auto& labels = result.codes->neuron_labels;
        write_file(dir / "psi_ppi.csv",
                   [&](std::ostream& o) { coding::write_psi_ppi_csv(*result.grid, labels, o); });
        write_file(dir / "psi_heatmap.svg", [&](std::ostream& o) {
            coding::write_heatmap_svg(result.grid->grid, labels,
                                      "Weight x activity (rows: post-synaptic)", o);
        });
    }

    for (const auto& s : result.stats)
        out << s.label << ": count=" << s.count << " mean_isi_s=" << fmt(s.mean_isi)
            << " frequency_mhz=" << fmt(s.frequency_mhz) << '\n';
    if (result.aggregate)
        out << "aggregate: mean_count=" << fmt(result.aggregate->mean_count)
            << " mean_isi_s=" << fmt(result.aggregate->mean_isi_of_means) << '\n';
    for (const auto& f : result.failures)
        err << "error: " << f.label << ": " << to_string(f.kind) << ": " << f.message << '\n';
    return result.exit_code();
}

int cmd_report(const ReportArgs& a, std::ostream& out)
{
    a.common.load();
    if (a.report.empty() && !a.table3)
        throw Error(ErrorKind::Validation, "give a report JSON or --table3");
    if (!a.report.empty()) {
        const auto j = read_json(a.report);
        try {
            out << "sample,count,mean_isi_s,frequency_mhz\n";
            for (const auto& s : j.at("samples")) {
                if (s.contains("error")) {
                    out << s.at("label").get<std::string>() << ",error,"
                        << s.at("error").get<std::string>() << ",\n";
                    continue;
                }
                auto opt = [&](const char* key) {
                    return s.at(key).is_null() ? std::string("n/a")
                                               : fmt(s.at(key).get<double>());
                };
                out << s.at("label").get<std::string>() << ',' << s.at("count").get<std::size_t>()
                    << ',' << opt("mean_isi_s") << ',' << opt("frequency_mhz") << '\n';
            }
            if (!j.at("aggregate").is_null()) {
                const auto& agg = j.at("aggregate");
                out << "mean_count=" << fmt(agg.at("mean_count").get<double>())
                    << " mean_isi_of_means_s="
                    << (agg.at("mean_isi_of_means_s").is_null()
                            ? std::string("n/a")
                            : fmt(agg.at("mean_isi_of_means_s").get<double>()))
                    << '\n';
            }
            if (!j.at("psi_ppi").is_null()) {
                const auto psi = j.at("psi_ppi").at("psi").get<std::vector<double>>();
                const auto ppi = j.at("psi_ppi").at("ppi").get<std::vector<double>>();
                const auto labels = j.at("codes").at("neuron_labels").get<std::vector<std::string>>();
                out << "neuron,psi,ppi\n";
                for (std::size_t i = 0; i < psi.size(); ++i)
                    out << labels.at(i) << ',' << fmt(psi[i]) << ',' << fmt(ppi[i]) << '\n';
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Parse, a.report + ": not a pipeline report: " + e.what());
        }
    }
    if (a.table3) {
        out << "label,mean_hz,predicted_hz,deviation_percent\n";
        for (const auto& row : qsar::table3())
            out << row.label << ',' << fmt(row.mean_firing_rate) << ',' << fmt(row.predicted)
                << ',' << fmt(qsar::percent_deviation(row.mean_firing_rate, row.predicted))
                << '\n';
    }
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"protoneuro: DPV waveforms, spike statistics, temporal coding, network "
                 "simulation and QSAR firing-rate models"};
    app.name("protoneuro");
    app.require_subcommand(1);

    WaveformArgs wf;
    auto* s_wf = app.add_subcommand("waveform", "Generate the DPV excitation waveform");
    wf.common.attach(s_wf);
    s_wf->add_option("--out", wf.out, "Waveform CSV path (default <output_dir>/waveform.csv)");
    s_wf->add_option("--instants", wf.instants, "Also write current-sampling instants CSV");
    s_wf->add_option("--equilibrium-time", wf.equilibrium_time, "Equilibration time (s)");
    s_wf->add_option("--start-potential", wf.start, "Scan start potential (V)");
    s_wf->add_option("--end-potential", wf.end, "Scan end potential (V)");
    s_wf->add_option("--step-size", wf.step, "Potential step (V)");
    s_wf->add_option("--pulse-amplitude", wf.amplitude, "Pulse amplitude (V)");
    s_wf->add_option("--pulse-width", wf.width, "Pulse width (s)");
    s_wf->add_option("--scan-rate", wf.rate, "Scan rate (V/s)");

    SynthArgs sy;
    auto* s_sy = app.add_subcommand("synth", "Synthesize a spiking current trace");
    sy.common.attach(s_sy);
    s_sy->add_option("--out", sy.out, "Output CSV (default <output_dir>/synth.csv)");
    s_sy->add_option("--duration", sy.duration, "Trace length (s)");
    s_sy->add_option("--count", sy.count, "Number of spikes to place");
    s_sy->add_option("--mean-isi", sy.mean_isi, "Mean inter-spike interval (s)");
    s_sy->add_option("--jitter", sy.jitter, "Relative ISI jitter in [0, 1)");
    s_sy->add_option("--spike-times", sy.spike_times, "Explicit comma-separated spike times (s)");
    s_sy->add_option("--amplitude", sy.amplitude, "Spike amplitude (uA)");
    s_sy->add_option("--half-width", sy.half_width, "Spike half width at half maximum (s)");
    s_sy->add_option("--baseline", sy.baseline, "Baseline current (uA)");
    s_sy->add_option("--noise-sd", sy.noise_sd, "White noise standard deviation (uA)");
    s_sy->add_option("--sample-interval", sy.sample_interval, "Sampling interval (s)");
    s_sy->add_option("--label", sy.label, "Sample label");

    DetectArgs de;
    auto* s_de = app.add_subcommand("detect", "Detect spikes and compute ISI statistics");
    de.common.attach(s_de);
    s_de->add_option("input", de.input, "Time-series CSV")->required();
    s_de->add_option("--threshold", de.threshold, "Spike threshold (series unit)");
    s_de->add_option("--min-distance", de.min_distance, "Minimum peak distance (s)");
    s_de->add_option("--train-out", de.train_out, "Spike train CSV path");
    s_de->add_option("--stats-out", de.stats_out, "Statistics JSON path");

    EncodeArgs en;
    auto* s_en = app.add_subcommand("encode", "Encode traces into a binary temporal code");
    en.common.attach(s_en);
    s_en->add_option("inputs", en.inputs, "Time-series CSVs, one per neuron")->required();
    s_en->add_option("--threshold", en.threshold, "Coding threshold");
    s_en->add_option("--neurons", en.neurons, "Neuron count");
    s_en->add_option("--sample-count", en.sample_count, "Number of time steps to encode");
    s_en->add_option("--out", en.out, "Code matrix CSV (default <output_dir>/codes.csv)");

    WeightsArgs we;
    auto* s_we = app.add_subcommand("weights", "Print or write a synaptic weight matrix");
    we.common.attach(s_we);
    s_we->add_flag("--table1", we.table1, "Use the published 10x10 initial weights");
    s_we->add_option("--neurons", we.neurons, "Neuron count for seeded weights");
    s_we->add_option("--out", we.out, "Weights CSV path (stdout when omitted)");

    SimArgs ss;
    auto* s_ss = app.add_subcommand("sim-spiking", "Simulate the recurrent LIF network");
    ss.common.attach(s_ss);
    s_ss->add_option("--spec", ss.spec, "Network spec JSON (else config 'sim_spiking')");
    s_ss->add_option("--out-dir", ss.out_dir, "Directory for trace/raster/output CSVs");

    SimArgs sr;
    auto* s_sr = app.add_subcommand("sim-rate", "Simulate the tanh rate network");
    sr.common.attach(s_sr);
    s_sr->add_option("--spec", sr.spec, "Network spec JSON (else config 'sim_rate')");
    s_sr->add_option("--out-dir", sr.out_dir, "Directory for the trace CSV");

    QsarFitArgs qf;
    auto* s_qf = app.add_subcommand("qsar-fit", "Fit the cubic firing-rate surface");
    qf.common.attach(s_qf);
    s_qf->add_option("observations", qf.input, "Observations CSV")->required();
    s_qf->add_option("--out", qf.out, "Model JSON (default <output_dir>/qsar_model.json)");
    s_qf->add_option("--level", qf.level, "Confidence level for coefficient bounds")
        ->check(CLI::Range(0.5, 0.9999));

    QsarPredictArgs qp;
    auto* s_qp = app.add_subcommand("qsar-predict", "Evaluate the firing-rate surface");
    qp.common.attach(s_qp);
    s_qp->add_option("--model", qp.model, "Model JSON (default: published coefficients)");
    s_qp->add_option("--x", qp.x, "Molecular weight (g/mol)");
    s_qp->add_option("--y", qp.y, "Peptide length (residues)");
    s_qp->add_option("--observations", qp.observations,
                     "Observations CSV; prints prediction and % deviation per row");
    s_qp->add_flag("--table3", qp.table3, "Percent deviations of the published predictions");

    PipelineArgs pl;
    auto* s_pl = app.add_subcommand("pipeline", "Run detect, stats, encode and PSI/PPI");
    pl.common.attach(s_pl);
    s_pl->add_option("manifest", pl.manifest, "Experiment manifest JSON")->required();
    s_pl->add_option("--out-dir", pl.out_dir, "Report directory (default <output_dir>)");

    ReportArgs rp;
    auto* s_rp = app.add_subcommand("report", "Summarise a pipeline report");
    rp.common.attach(s_rp);
    s_rp->add_option("report", rp.report, "report.json written by `pipeline`");
    s_rp->add_flag("--table3", rp.table3, "Append published QSAR percent deviations");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (s_wf->parsed())
            return cmd_waveform(wf, out);
        if (s_sy->parsed())
            return cmd_synth(sy, out);
        if (s_de->parsed())
            return cmd_detect(de, out);
        if (s_en->parsed())
            return cmd_encode(en, out);
        if (s_we->parsed())
            return cmd_weights(we, out);
        if (s_ss->parsed())
            return cmd_sim_spiking(ss, out);
        if (s_sr->parsed())
            return cmd_sim_rate(sr, out);
        if (s_qf->parsed())
            return cmd_qsar_fit(qf, out, err);
        if (s_qp->parsed())
            return cmd_qsar_predict(qp, out);
        if (s_pl->parsed())
            return cmd_pipeline(pl, out, err);
        if (s_rp->parsed())
            return cmd_report(rp, out);
    } catch (const Error& e) {
        err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const nlohmann::json::exception& e) {
        err << "error: parse-error: " << e.what() << '\n';
        return 2;
    } catch (const fs::filesystem_error& e) {
        err << "error: io-error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

} // namespace protoneuro::cli
