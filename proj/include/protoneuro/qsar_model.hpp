#pragma once

#include <Eigen/Core>
#include <json.hpp>

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace protoneuro::qsar {

inline constexpr std::size_t kTerms = 9;

// Basis order: 1, x, y, x^2, xy, y^2, x^2 y, x y^2, y^3
inline constexpr std::array<std::string_view, kTerms> kCoefficientNames = {
    "p00", "p10", "p01", "p20", "p11", "p02", "p21", "p12", "p03"};

struct Interval {
    double low;
    double high;
};

/// Coefficients of the cubic firing-rate surface
///   f(x, y) = p00 + p10 x + p01 y + p20 x^2 + p11 x y + p02 y^2
///           + p21 x^2 y + p12 x y^2 + p03 y^3
/// with x the molecular weight (g/mol) and y the peptide length (residues).
struct QsarCoefficients {
    std::array<double, kTerms> values{};
    std::optional<std::array<Interval, kTerms>> bounds;

    double& operator[](std::size_t k) { return values[k]; }
    double operator[](std::size_t k) const { return values[k]; }
};

void validate(const QsarCoefficients& coeffs);

// The published surface, including its 95% bounds.
QsarCoefficients published_coefficients();

struct SamplePredictors {
    std::string label;
    double molecular_weight; // x, g/mol
    double peptide_length;   // y, residues
};

struct QsarObservation {
    SamplePredictors predictors;
    double mean_firing_rate; // Hz
};

struct FitResult {
    QsarCoefficients coefficients;
    double residual_sum_of_squares = 0.0;
    std::size_t observations = 0;
    Eigen::VectorXd residuals;
    // (X^T X)^{-1} in the caller's units.
    Eigen::Matrix<double, kTerms, kTerms> unscaled_covariance;
};

std::array<double, kTerms> basis(double x, double y);

double predict(const QsarCoefficients& coeffs, double x, double y);

/// Ordinary least squares on the nine-term basis.
///
/// Columns are scaled to unit max-norm before a column-pivoting Householder
/// QR so that molecular weights in the hundreds and lengths in single digits
/// stay well conditioned; results are mapped back to unscaled units.
/// Throws TooFewObservations for fewer than nine observations and
/// RankDeficient (naming the dependent basis terms) otherwise.
FitResult fit(std::span<const QsarObservation> observations);

/// Two-sided intervals value +- t_{(1+level)/2, n-9} * SE from the residual
/// variance and the design covariance. Needs more than nine observations.
std::array<Interval, kTerms> confidence_bounds(const FitResult& fit,
                                               std::span<const QsarObservation> observations,
                                               double level = 0.95);

// 100 * (predicted - mean) / mean
double percent_deviation(double mean, double predicted);

struct Table3Row {
    std::string_view label;
    double mean_firing_rate; // Hz
    double predicted;        // Hz
};

// Published mean firing rates and model predictions for the twelve samples.
std::span<const Table3Row> table3();

std::vector<QsarObservation> read_observations_csv(std::istream& in,
                                                   const std::string& source = "<stream>");
void write_observations_csv(std::span<const QsarObservation> observations, std::ostream& out);

nlohmann::ordered_json to_json(const QsarCoefficients& coeffs);
QsarCoefficients coefficients_from_json(const nlohmann::json& j);

} // namespace protoneuro::qsar
