#include "protoneuro/config.hpp"

#include "protoneuro/error.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

namespace protoneuro {

namespace {

nlohmann::json parse_file(const std::filesystem::path& path)
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

template <typename T>
T field(const nlohmann::json& j, const char* key, T fallback)
{
    if (!j.contains(key) || j[key].is_null())
        return fallback;
    try {
        return j[key].get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorKind::Parse, std::string("field '") + key + "' has the wrong type");
    }
}

const nlohmann::json& section(const nlohmann::json& j, const char* key)
{
    static const nlohmann::json empty = nlohmann::json::object();
    if (!j.contains(key))
        return empty;
    if (!j[key].is_object())
        throw Error(ErrorKind::Parse, std::string("section '") + key + "' must be an object");
    return j[key];
}

} // namespace

dpv::DpvParameters dpv_from_json(const nlohmann::json& j, dpv::DpvParameters p)
{
    p.equilibrium_time = field(j, "equilibrium_time", p.equilibrium_time);
    p.start_potential = field(j, "start_potential", p.start_potential);
    p.end_potential = field(j, "end_potential", p.end_potential);
    p.step_size = field(j, "step_size", p.step_size);
    p.pulse_amplitude = field(j, "pulse_amplitude", p.pulse_amplitude);
    p.pulse_width = field(j, "pulse_width", p.pulse_width);
    p.scan_rate = field(j, "scan_rate", p.scan_rate);
    return p;
}

SpikeDetectionConfig detection_from_json(const nlohmann::json& j, SpikeDetectionConfig c)
{
    c.threshold = field(j, "threshold", c.threshold);
    c.min_peak_distance = field(j, "min_peak_distance", c.min_peak_distance);
    return c;
}

coding::CodingConfig coding_from_json(const nlohmann::json& j, coding::CodingConfig c)
{
    const auto n = field<long long>(j, "neuron_count", static_cast<long long>(c.neuron_count));
    if (n < 1)
        throw Error(ErrorKind::Validation, "coding.neuron_count must be >= 1");
    c.neuron_count = static_cast<std::size_t>(n);
    c.threshold = field(j, "threshold", c.threshold);
    c.time_window = field(j, "time_window", c.time_window);
    if (j.contains("sample_count") && !j["sample_count"].is_null()) {
        const auto s = field<long long>(j, "sample_count", 0);
        if (s < 1)
            throw Error(ErrorKind::Validation, "coding.sample_count must be >= 1");
        c.sample_count = static_cast<std::size_t>(s);
    }
    return c;
}

SyntheticSpikeSpec synth_from_json(const nlohmann::json& j, SyntheticSpikeSpec s)
{
    s.duration = field(j, "duration", s.duration);
    if (j.contains("spike_times") && !j["spike_times"].is_null())
        s.spike_times = field<std::vector<double>>(j, "spike_times", {});
    const auto count = field<long long>(j, "count", static_cast<long long>(s.count));
    if (count < 0)
        throw Error(ErrorKind::Validation, "synth.count must be >= 0");
    s.count = static_cast<std::size_t>(count);
    s.mean_isi = field(j, "mean_isi", s.mean_isi);
    s.jitter_fraction = field(j, "jitter_fraction", s.jitter_fraction);
    s.spike_amplitude = field(j, "spike_amplitude", s.spike_amplitude);
    s.spike_half_width = field(j, "spike_half_width", s.spike_half_width);
    s.baseline = field(j, "baseline", s.baseline);
    s.noise_sd = field(j, "noise_sd", s.noise_sd);
    s.sample_interval = field(j, "sample_interval", s.sample_interval);
    s.seed = field(j, "seed", s.seed);
    s.label = field(j, "label", s.label);
    return s;
}

nlohmann::ordered_json to_json(const dpv::DpvParameters& p)
{
    return {{"equilibrium_time", p.equilibrium_time}, {"start_potential", p.start_potential},
            {"end_potential", p.end_potential},       {"step_size", p.step_size},
            {"pulse_amplitude", p.pulse_amplitude},   {"pulse_width", p.pulse_width},
            {"scan_rate", p.scan_rate}};
}

nlohmann::ordered_json to_json(const SpikeDetectionConfig& c)
{
    return {{"threshold", c.threshold}, {"min_peak_distance", c.min_peak_distance}};
}

nlohmann::ordered_json to_json(const coding::CodingConfig& c)
{
    nlohmann::ordered_json j = {{"neuron_count", c.neuron_count},
                                {"threshold", c.threshold},
                                {"time_window", c.time_window}};
    j["sample_count"] = c.sample_count ? nlohmann::ordered_json(*c.sample_count) : nullptr;
    return j;
}

RunConfig run_config_from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw Error(ErrorKind::Parse, "config must be a JSON object");
    RunConfig c;
    c.seed = field<std::uint64_t>(j, "seed", 0);
    c.output_dir = field<std::string>(j, "output_dir", ".");
    c.dpv = dpv_from_json(section(j, "dpv"));
    c.detection = detection_from_json(section(j, "detection"));
    c.coding = coding_from_json(section(j, "coding"));
    try {
        c.lif = sim::lif_from_json(section(j, "lif"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("lif section: ") + e.what());
    }
    for (const char* key : {"synth", "sim_spiking", "sim_rate"})
        if (j.contains(key))
            c.sections[key] = j[key];
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    return run_config_from_json(parse_file(path));
}

void validate(const RunConfig& config)
{
    dpv::validate(config.dpv);
    validate(config.detection);
    coding::validate(config.coding);
    sim::validate(config.lif);
}

std::optional<std::uint64_t> seed_from_environment()
{
    const char* raw = std::getenv("PROTONEURO_SEED");
    if (!raw || !*raw)
        return std::nullopt;
    const std::string s(raw);
    if (s.find_first_not_of("0123456789") != std::string::npos)
        throw Error(ErrorKind::Validation, "PROTONEURO_SEED must be an unsigned integer");
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw Error(ErrorKind::Validation, "PROTONEURO_SEED out of range");
    }
}

ExperimentManifest manifest_from_json(const nlohmann::json& j,
                                      const std::filesystem::path& base_dir)
{
    if (!j.is_object())
        throw Error(ErrorKind::Parse, "manifest must be a JSON object");
    ExperimentManifest m;
    m.sample_labels = field<std::vector<std::string>>(j, "sample_labels", {});
    const auto files = field<std::vector<std::string>>(j, "source_files", {});
    if (m.sample_labels.size() != files.size())
        throw Error(ErrorKind::Validation, "sample_labels and source_files differ in length");
    if (m.sample_labels.empty())
        throw Error(ErrorKind::Validation, "manifest lists no samples");
    std::set<std::string> seen;
    for (const auto& l : m.sample_labels)
        if (!seen.insert(l).second)
            throw Error(ErrorKind::Validation, "duplicate sample label '" + l + "'");

    for (const auto& f : files) {
        std::filesystem::path p(f);
        if (p.is_relative() && !base_dir.empty())
            p = base_dir / p;
        if (!std::filesystem::exists(p))
            throw Error(ErrorKind::Io, "manifest references missing file " + p.string());
        m.source_files.push_back(p);
    }

    m.detection = detection_from_json(section(j, "detection"));
    m.coding = coding_from_json(section(j, "coding"));
    m.seed = field<std::uint64_t>(j, "seed", 0);
    m.fire_threshold = field(j, "fire_threshold", 0.0);
    const auto weights = field<std::string>(j, "weights", "");
    if (weights == "table1")
        m.weights = WeightSource::Table1;
    else if (weights == "seeded")
        m.weights = WeightSource::Seeded;
    else if (!weights.empty())
        throw Error(ErrorKind::Validation, "manifest weights must be 'table1' or 'seeded'");

    validate(m.detection);
    coding::validate(m.coding);
    if (m.sample_labels.size() > m.coding.neuron_count)
        throw Error(ErrorKind::Validation,
                    "manifest has " + std::to_string(m.sample_labels.size()) +
                        " samples but coding.neuron_count is " +
                        std::to_string(m.coding.neuron_count));
    return m;
}

ExperimentManifest load_manifest(const std::filesystem::path& path)
{
    return manifest_from_json(parse_file(path), path.parent_path());
}

nlohmann::ordered_json to_json(const ExperimentManifest& m)
{
    nlohmann::ordered_json j;
    j["sample_labels"] = m.sample_labels;
    std::vector<std::string> files;
    for (const auto& f : m.source_files)
        files.push_back(f.filename().string());
    j["source_files"] = files;
    j["detection"] = to_json(m.detection);
    j["coding"] = to_json(m.coding);
    j["seed"] = m.seed;
    return j;
}

} // namespace protoneuro
