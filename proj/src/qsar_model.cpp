#include "protoneuro/qsar_model.hpp"

#include "protoneuro/error.hpp"
#include "text.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <istream>
#include <ostream>

namespace protoneuro::qsar {

void validate(const QsarCoefficients& coeffs)
{
    for (std::size_t k = 0; k < kTerms; ++k) {
        if (!std::isfinite(coeffs.values[k]))
            throw Error(ErrorKind::NonFinite,
                        "coefficient " + std::string(kCoefficientNames[k]) + " is not finite");
        if (coeffs.bounds) {
            const auto& b = (*coeffs.bounds)[k];
            if (!(b.low <= coeffs.values[k] && coeffs.values[k] <= b.high))
                throw Error(ErrorKind::Validation, "coefficient " +
                                                       std::string(kCoefficientNames[k]) +
                                                       " lies outside its bounds");
        }
    }
}

QsarCoefficients published_coefficients()
{
    QsarCoefficients c;
    c.values = {2349, -12.08, -1770, -0.1149, 48.49, -2545, 0.04667, -17.24, 1151};
    c.bounds = std::array<Interval, kTerms>{{
        {-3560, 8258},
        {-45.24, 21.07},
        {-1.172e4, 8182},
        {-0.6961, 0.4664},
        {-128.7, 225.7},
        {-1.132e4, 6227},
        {-0.1628, 0.2561},
        {-79.99, 45.5},
        {-2675, 4977},
    }};
    return c;
}

std::array<double, kTerms> basis(double x, double y)
{
    return {1.0, x, y, x * x, x * y, y * y, x * x * y, x * y * y, y * y * y};
}

double predict(const QsarCoefficients& coeffs, double x, double y)
{
    if (!std::isfinite(x) || !std::isfinite(y))
        throw Error(ErrorKind::NonFinite, "predict: non-finite predictor");
    for (double v : coeffs.values)
        if (!std::isfinite(v))
            throw Error(ErrorKind::NonFinite, "predict: non-finite coefficient");
    const auto b = basis(x, y);
    double sum = 0.0;
    for (std::size_t k = 0; k < kTerms; ++k)
        sum += coeffs.values[k] * b[k];
    return sum;
}

FitResult fit(std::span<const QsarObservation> observations)
{
    const auto n = static_cast<Eigen::Index>(observations.size());
    if (observations.size() < kTerms)
        throw Error(ErrorKind::TooFewObservations,
                    "fit needs at least 9 observations, got " + std::to_string(n));

    Eigen::MatrixXd design(n, kTerms);
    Eigen::VectorXd rate(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& obs = observations[static_cast<std::size_t>(i)];
        const double x = obs.predictors.molecular_weight;
        const double y = obs.predictors.peptide_length;
        if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(obs.mean_firing_rate))
            throw Error(ErrorKind::NonFinite, "fit: non-finite observation " + std::to_string(i));
        const auto b = basis(x, y);
        for (std::size_t k = 0; k < kTerms; ++k)
            design(i, static_cast<Eigen::Index>(k)) = b[k];
        rate(i) = obs.mean_firing_rate;
    }

    Eigen::Matrix<double, kTerms, 1> scale;
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(kTerms); ++k) {
        const double m = design.col(k).cwiseAbs().maxCoeff();
        scale(k) = m > 0.0 ? m : 1.0;
    }
    const Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(kTerms)) {
        std::string names;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index k = qr.rank(); k < static_cast<Eigen::Index>(kTerms); ++k) {
            names += names.empty() ? "" : ", ";
            names += kCoefficientNames[static_cast<std::size_t>(perm(k))];
        }
        throw Error(ErrorKind::RankDeficient,
                    "design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                        " of 9); dependent terms: " + names);
    }

    const Eigen::VectorXd beta_scaled = qr.solve(rate);

    FitResult result;
    result.observations = observations.size();
    for (std::size_t k = 0; k < kTerms; ++k)
        result.coefficients.values[k] =
            beta_scaled(static_cast<Eigen::Index>(k)) / scale(static_cast<Eigen::Index>(k));
    result.residuals = rate - scaled * beta_scaled;
    result.residual_sum_of_squares = result.residuals.squaredNorm();

    // (Xs^T Xs)^{-1} = P R^{-1} R^{-T} P^T, then undo the column scaling.
    const Eigen::Matrix<double, kTerms, kTerms> r =
        qr.matrixR().topLeftCorner(kTerms, kTerms).triangularView<Eigen::Upper>();
    const Eigen::Matrix<double, kTerms, kTerms> r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::Matrix<double, kTerms, kTerms>::Identity());
    const Eigen::Matrix<double, kTerms, kTerms> inner = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation();
    const Eigen::Matrix<double, kTerms, kTerms> cov_scaled = perm * inner * perm.transpose();
    result.unscaled_covariance =
        scale.cwiseInverse().asDiagonal() * cov_scaled * scale.cwiseInverse().asDiagonal();
    return result;
}

std::array<Interval, kTerms> confidence_bounds(const FitResult& fit,
                                               std::span<const QsarObservation> observations,
                                               double level)
{
    if (observations.size() <= kTerms || fit.observations <= kTerms)
        throw Error(ErrorKind::InsufficientDegreesOfFreedom,
                    "confidence bounds need more than 9 observations");
    if (observations.size() != fit.observations)
        throw Error(ErrorKind::DimensionMismatch, "observations do not match the fit");
    if (!(level > 0.0 && level < 1.0))
        throw Error(ErrorKind::Validation, "confidence level must be in (0, 1)");

    const double dof = static_cast<double>(fit.observations - kTerms);
    const double sigma2 = fit.residual_sum_of_squares / dof;
    const boost::math::students_t dist(dof);
    const double t = boost::math::quantile(dist, 0.5 + level / 2.0);

    std::array<Interval, kTerms> out{};
    for (std::size_t k = 0; k < kTerms; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        const double se = std::sqrt(sigma2 * fit.unscaled_covariance(kk, kk));
        const double v = fit.coefficients.values[k];
        out[k] = {v - t * se, v + t * se};
    }
    return out;
}

double percent_deviation(double mean, double predicted)
{
    if (mean == 0.0)
        throw Error(ErrorKind::ZeroMean, "percent deviation undefined for zero mean");
    return 100.0 * (predicted - mean) / mean;
}

std::span<const Table3Row> table3()
{
    static constexpr std::array<Table3Row, 12> rows = {{
        {"L-Glu:L-Asp", 535.4877, 536.0542},
        {"L-Glu:L-Asp:L-Phe", 436.2721, 492.8753},
        {"L-Lys:L-Phe:L-Glu", 542.9443, 563.6253},
        {"L-Glu:L-Phe:L-His", 567.0562, 521.7084},
        {"L-Glu:L-Phe:PLLA", 498.2888, 551.9483},
        {"L-Lys:L-Phe:L-His:PLLA", 650.4798, -901.3635},
        {"L-Glu:L-Arg", 732.9516, -2041.8},
        {"L-Asp", 529.072, 723.4966},
        {"L-Phe:L-Lys", 768.2345, -2619.1},
        {"L-Glu:L-Asp:L-Pro", 617.3223, 1345.4},
        {"L-Phe", 491.5065, 471.338},
        {"L-Glu:L-Phe", 665.2995, -1084.7},
    }};
    return rows;
}

std::vector<QsarObservation> read_observations_csv(std::istream& in, const std::string& source)
{
    std::vector<QsarObservation> out;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = detail::trim(line);
        if (text.empty() || text.front() == '#')
            continue;
        auto fields = detail::split_csv(text);
        auto fail = [&](const std::string& what) {
            return Error(ErrorKind::Parse, source + ":" + std::to_string(line_no) + ": " + what);
        };
        if (!have_header) {
            if (fields.size() != 4 || fields[0] != "label" ||
                fields[1] != "molecular_weight_gmol" || fields[2] != "peptide_length" ||
                fields[3] != "mean_firing_rate_hz")
                throw fail("expected header "
                           "'label,molecular_weight_gmol,peptide_length,mean_firing_rate_hz'");
            have_header = true;
            continue;
        }
        if (fields.size() != 4)
            throw fail("expected 4 fields");
        auto x = detail::parse_double(fields[1]);
        auto y = detail::parse_double(fields[2]);
        auto r = detail::parse_double(fields[3]);
        if (!x || !y || !r)
            throw fail("malformed number");
        if (!(*x > 0.0))
            throw Error(ErrorKind::Validation,
                        source + ":" + std::to_string(line_no) + ": molecular weight must be > 0");
        if (!(*y >= 1.0))
            throw Error(ErrorKind::Validation,
                        source + ":" + std::to_string(line_no) + ": peptide length must be >= 1");
        if (!std::isfinite(*r))
            throw Error(ErrorKind::Validation,
                        source + ":" + std::to_string(line_no) + ": firing rate must be finite");
        out.push_back({{std::string(fields[0]), *x, *y}, *r});
    }
    if (!have_header)
        throw Error(ErrorKind::Parse, source + ": missing header");
    return out;
}

void write_observations_csv(std::span<const QsarObservation> observations, std::ostream& out)
{
    out << "label,molecular_weight_gmol,peptide_length,mean_firing_rate_hz\n";
    for (const auto& o : observations)
        out << o.predictors.label << ',' << detail::format_shortest(o.predictors.molecular_weight)
            << ',' << detail::format_shortest(o.predictors.peptide_length) << ','
            << detail::format_shortest(o.mean_firing_rate) << '\n';
}

nlohmann::ordered_json to_json(const QsarCoefficients& coeffs)
{
    nlohmann::ordered_json j;
    nlohmann::ordered_json values;
    for (std::size_t k = 0; k < kTerms; ++k)
        values[std::string(kCoefficientNames[k])] = coeffs.values[k];
    j["coefficients"] = std::move(values);
    if (coeffs.bounds) {
        nlohmann::ordered_json bounds;
        for (std::size_t k = 0; k < kTerms; ++k)
            bounds[std::string(kCoefficientNames[k])] = {(*coeffs.bounds)[k].low,
                                                         (*coeffs.bounds)[k].high};
        j["bounds"] = std::move(bounds);
    } else {
        j["bounds"] = nullptr;
    }
    return j;
}

QsarCoefficients coefficients_from_json(const nlohmann::json& j)
{
    try {
        QsarCoefficients c;
        const auto& values = j.at("coefficients");
        for (std::size_t k = 0; k < kTerms; ++k)
            c.values[k] = values.at(std::string(kCoefficientNames[k])).get<double>();
        if (j.contains("bounds") && !j["bounds"].is_null()) {
            std::array<Interval, kTerms> b{};
            for (std::size_t k = 0; k < kTerms; ++k) {
                const auto& pair = j["bounds"].at(std::string(kCoefficientNames[k]));
                b[k] = {pair.at(0).get<double>(), pair.at(1).get<double>()};
            }
            c.bounds = b;
        }
        validate(c);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("QSAR model JSON: ") + e.what());
    }
}

} // namespace protoneuro::qsar
