#pragma once

#include "protoneuro/config.hpp"
#include "protoneuro/error.hpp"
#include "protoneuro/spike_analysis.hpp"
#include "protoneuro/temporal_coding.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace protoneuro {

struct SampleFailure {
    std::string label;
    ErrorKind kind;
    std::string message;
};

struct PipelineResult {
    std::vector<SpikeStats> stats;           // successfully analysed samples, manifest order
    std::optional<AggregateStats> aggregate;
    std::optional<coding::CodeMatrix> codes;
    std::optional<coding::WeightMatrix> weights;
    std::optional<coding::PsiPpiGrid> grid;
    std::vector<SampleFailure> failures;
    nlohmann::ordered_json report;

    // 0 on full success, otherwise the exit code of the first failure.
    int exit_code() const;
};

/// detect -> stats per sample, then encode all samples into one code matrix
/// and compute PSI/PPI against the manifest's weight matrix. Samples are
/// loaded and analysed concurrently; results are assembled in manifest order
/// so the report does not depend on scheduling.
///
/// A sample that fails to load contributes an all-zero code row and a
/// failure entry. Weight seeding uses derive_seed(seed, "coding.weights").
PipelineResult run_pipeline(const ExperimentManifest& manifest);

} // namespace protoneuro
