#pragma once

#include "protoneuro/dpv_waveform.hpp"
#include "protoneuro/network_sim.hpp"
#include "protoneuro/signal_io.hpp"
#include "protoneuro/spike_analysis.hpp"
#include "protoneuro/temporal_coding.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace protoneuro {

/// One JSON document per experiment. Top-level keys:
///   seed, output_dir, dpv, detection, coding, lif
/// plus optional per-subcommand sections (synth, sim_spiking, sim_rate)
/// that are kept verbatim in `sections`.
struct RunConfig {
    dpv::DpvParameters dpv;
    SpikeDetectionConfig detection;
    coding::CodingConfig coding;
    sim::LifParameters lif;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = ".";
    nlohmann::json sections = nlohmann::json::object();
};

RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
void validate(const RunConfig& config);

dpv::DpvParameters dpv_from_json(const nlohmann::json& j, dpv::DpvParameters base = {});
SpikeDetectionConfig detection_from_json(const nlohmann::json& j, SpikeDetectionConfig base = {});
coding::CodingConfig coding_from_json(const nlohmann::json& j, coding::CodingConfig base = {});
SyntheticSpikeSpec synth_from_json(const nlohmann::json& j, SyntheticSpikeSpec base = {});

nlohmann::ordered_json to_json(const dpv::DpvParameters& p);
nlohmann::ordered_json to_json(const SpikeDetectionConfig& c);
nlohmann::ordered_json to_json(const coding::CodingConfig& c);

// Reads PROTONEURO_SEED; throws Validation if set but not an unsigned integer.
std::optional<std::uint64_t> seed_from_environment();

enum class WeightSource { Table1, Seeded };

/// Experiment manifest: one recording per sample, assigned to neurons in
/// listed order. Relative source paths resolve against the manifest's
/// directory.
struct ExperimentManifest {
    std::vector<std::string> sample_labels;
    std::vector<std::filesystem::path> source_files;
    SpikeDetectionConfig detection;
    coding::CodingConfig coding;
    std::uint64_t seed = 0;
    std::optional<WeightSource> weights; // default: Table1 when N == 10
    double fire_threshold = 0.0;
};

// Throws Parse/Validation for malformed manifests and Io when a referenced
// file is missing.
ExperimentManifest manifest_from_json(const nlohmann::json& j,
                                      const std::filesystem::path& base_dir = {});
ExperimentManifest load_manifest(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const ExperimentManifest& manifest);

} // namespace protoneuro
