#pragma once

#include "protoneuro/signal_io.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace protoneuro::coding {

using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
using BinaryVector = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;

struct CodingConfig {
    std::size_t neuron_count = 10;
    double threshold = 0.0005;   // same unit as the encoded traces
    double time_window = 1.0;    // s; stored only, no formula reads it
    std::optional<std::size_t> sample_count; // columns; taken from the data when unset
};

void validate(const CodingConfig& config);

/// Binary temporal code: row j is neuron j, column k is time step k.
struct CodeMatrix {
    BinaryMatrix entries;
    std::vector<std::string> neuron_labels;
    double time_base = 1.0; // s per column

    Eigen::Index neurons() const { return entries.rows(); }
    Eigen::Index steps() const { return entries.cols(); }
};

/// Square synaptic weight matrix with entries in [-1, 1]. W(j, i) is the
/// weight from pre-synaptic neuron i onto post-synaptic neuron j.
class WeightMatrix {
public:
    explicit WeightMatrix(Eigen::MatrixXd entries);

    const Eigen::MatrixXd& entries() const { return entries_; }
    Eigen::Index size() const { return entries_.rows(); }
    double operator()(Eigen::Index post, Eigen::Index pre) const { return entries_(post, pre); }

private:
    Eigen::MatrixXd entries_;
};

/// Connection-strength summary used for the PSI/PPI heatmaps.
///
/// grid(j, i) = W(j, i) * activity(i), where activity(i) is the fraction of
/// time steps in which neuron i's code is 1. psi(j) sums row j (drive
/// received by neuron j); ppi(i) sums column i (drive sent by neuron i).
struct PsiPpiGrid {
    Eigen::VectorXd psi;
    Eigen::VectorXd ppi;
    Eigen::MatrixXd grid;
};

// entry(j, k) = potentials(j, k) > theta.
CodeMatrix encode(const Eigen::MatrixXd& potentials, double theta,
                  std::vector<std::string> labels = {}, double time_base = 1.0);

// As above, additionally checking the shape against the config.
CodeMatrix encode(const Eigen::MatrixXd& potentials, const CodingConfig& config,
                  std::vector<std::string> labels = {}, double time_base = 1.0);

struct PotentialMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> labels;
    double time_base = 1.0;
};

/// Stack traces into an N x n potential matrix, one trace per neuron in the
/// given order. Traces must share their time stamps over the first n
/// samples, where n is `sample_count` or the shortest trace length. Neurons
/// without a trace get an all-zero row.
PotentialMatrix stack_traces(std::span<const TimeSeries> traces, std::size_t neuron_count,
                             std::optional<std::size_t> sample_count = std::nullopt);

// Entries i.i.d. uniform on [-1, 1) from Rng(seed).
WeightMatrix init_weights(std::size_t neuron_count, std::uint64_t seed);

// The 10 x 10 initial weights published for the proteinoid network.
WeightMatrix table1_fixture();

PsiPpiGrid psi_ppi(const WeightMatrix& weights, const CodeMatrix& codes);

// output(j) = (W * input)(j) > fire_threshold
BinaryVector fire_step(const BinaryVector& input, const WeightMatrix& weights,
                       double fire_threshold);

void write_code_matrix_csv(const CodeMatrix& codes, std::ostream& out);
void write_psi_ppi_csv(const PsiPpiGrid& grid, std::span<const std::string> labels,
                       std::ostream& out);
void write_weights_csv(const WeightMatrix& weights, std::ostream& out);
WeightMatrix read_weights_csv(std::istream& in);

/// Standalone SVG heatmap of the grid. Colour ramps linearly from light
/// green at the minimum to dark blue at the maximum.
void write_heatmap_svg(const Eigen::MatrixXd& grid, std::span<const std::string> labels,
                       const std::string& title, std::ostream& out);

nlohmann::ordered_json to_json(const CodeMatrix& codes);
nlohmann::ordered_json to_json(const WeightMatrix& weights);
nlohmann::ordered_json to_json(const PsiPpiGrid& grid);

} // namespace protoneuro::coding
