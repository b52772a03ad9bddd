#include "protoneuro/temporal_coding.hpp"

#include "protoneuro/error.hpp"
#include "protoneuro/random.hpp"
#include "text.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>

namespace protoneuro::coding {

namespace {

[[noreturn]] void mismatch(const std::string& what)
{
    throw Error(ErrorKind::DimensionMismatch, what);
}

std::string default_label(std::size_t j)
{
    return "neuron_" + std::to_string(j + 1);
}

} // namespace

void validate(const CodingConfig& config)
{
    if (config.neuron_count < 1)
        throw Error(ErrorKind::Validation, "coding.neuron_count must be >= 1");
    if (!std::isfinite(config.threshold))
        throw Error(ErrorKind::Validation, "coding.threshold must be finite");
    if (!(std::isfinite(config.time_window) && config.time_window > 0.0))
        throw Error(ErrorKind::Validation, "coding.time_window must be > 0");
    if (config.sample_count && *config.sample_count < 1)
        throw Error(ErrorKind::Validation, "coding.sample_count must be >= 1");
}

WeightMatrix::WeightMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries))
{
    if (entries_.rows() != entries_.cols() || entries_.rows() == 0)
        mismatch("weight matrix must be square and non-empty");
    for (Eigen::Index j = 0; j < entries_.rows(); ++j)
        for (Eigen::Index i = 0; i < entries_.cols(); ++i) {
            const double w = entries_(j, i);
            if (!(w >= -1.0 && w <= 1.0))
                throw Error(ErrorKind::Validation, "weight outside [-1, 1] at (" +
                                                       std::to_string(j) + ", " +
                                                       std::to_string(i) + ")");
        }
}

CodeMatrix encode(const Eigen::MatrixXd& potentials, double theta,
                  std::vector<std::string> labels, double time_base)
{
    if (!std::isfinite(theta))
        throw Error(ErrorKind::Validation, "coding threshold must be finite");
    if (labels.empty())
        for (Eigen::Index j = 0; j < potentials.rows(); ++j)
            labels.push_back(default_label(static_cast<std::size_t>(j)));
    if (static_cast<Eigen::Index>(labels.size()) != potentials.rows())
        mismatch("label count does not match neuron count");

    CodeMatrix out;
    out.entries = (potentials.array() > theta).cast<std::uint8_t>();
    out.neuron_labels = std::move(labels);
    out.time_base = time_base;
    return out;
}

CodeMatrix encode(const Eigen::MatrixXd& potentials, const CodingConfig& config,
                  std::vector<std::string> labels, double time_base)
{
    validate(config);
    if (potentials.rows() != static_cast<Eigen::Index>(config.neuron_count))
        mismatch("potential matrix has " + std::to_string(potentials.rows()) +
                 " rows, expected " + std::to_string(config.neuron_count));
    if (config.sample_count &&
        potentials.cols() != static_cast<Eigen::Index>(*config.sample_count))
        mismatch("potential matrix has " + std::to_string(potentials.cols()) +
                 " columns, expected " + std::to_string(*config.sample_count));
    return encode(potentials, config.threshold, std::move(labels), time_base);
}

PotentialMatrix stack_traces(std::span<const TimeSeries> traces, std::size_t neuron_count,
                             std::optional<std::size_t> sample_count)
{
    if (traces.size() > neuron_count)
        mismatch(std::to_string(traces.size()) + " traces for " +
                 std::to_string(neuron_count) + " neurons");

    std::size_t n = 0;
    if (sample_count) {
        n = *sample_count;
    } else if (!traces.empty()) {
        n = traces.front().size();
        for (const auto& tr : traces)
            n = std::min(n, tr.size());
    } else {
        mismatch("cannot infer sample count without traces");
    }
    for (const auto& tr : traces) {
        if (tr.size() < n)
            mismatch("trace '" + tr.label() + "' is shorter than the sample count");
        for (std::size_t k = 0; k < n; ++k)
            if (tr.times()[k] != traces.front().times()[k])
                mismatch("trace '" + tr.label() + "' does not share the common time base");
    }

    PotentialMatrix out;
    out.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(neuron_count),
                                       static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < neuron_count; ++j) {
        if (j < traces.size()) {
            const auto v = traces[j].values();
            for (std::size_t k = 0; k < n; ++k)
                out.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = v[k];
            out.labels.push_back(traces[j].label().empty() ? default_label(j)
                                                           : traces[j].label());
        } else {
            out.labels.push_back(default_label(j));
        }
    }
    if (!traces.empty() && n >= 2)
        out.time_base = traces.front().times()[1] - traces.front().times()[0];
    return out;
}

WeightMatrix init_weights(std::size_t neuron_count, std::uint64_t seed)
{
    if (neuron_count < 1)
        throw Error(ErrorKind::Validation, "neuron count must be >= 1");
    Rng rng(seed);
    const auto n = static_cast<Eigen::Index>(neuron_count);
    Eigen::MatrixXd w(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            w(j, i) = rng.uniform(-1.0, 1.0);
    return WeightMatrix(std::move(w));
}

WeightMatrix table1_fixture()
{
    static constexpr std::array<double, 100> values = {
        -1.0, 1.0,  1.0,  1.0,  -1.0, 1.0,  -1.0, 1.0,  -1.0, 1.0,
        1.0,  -1.0, 1.0,  1.0,  1.0,  -1.0, 1.0,  1.0,  -1.0, 1.0,
        1.0,  -1.0, -0.4, -1.0, -0.8, -1.0, -1.0, 1.0,  -1.0, -1.0,
        -1.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0, 1.0,  1.0,
        -1.0, -1.0, 0.2,  -1.0, -1.0, -1.0, 1.0,  -1.0, 1.0,  1.0,
        -1.0, 1.0,  0.5,  1.0,  1.0,  1.0,  -1.0, 1.0,  -1.0, 0.7,
        1.0,  -0.5, -0.6, 0.7,  1.0,  1.0,  -0.7, 1.0,  1.0,  -1.0,
        -1.0, 1.0,  1.0,  -0.9, -1.0, -1.0, 1.0,  -1.0, 1.0,  1.0,
        1.0,  -1.0, 1.0,  1.0,  -1.0, -1.0, 1.0,  -1.0, 1.0,  -1.0,
        0.3,  1.0,  -1.0, -1.0, -0.2, -1.0, 0.1,  -1.0, 1.0,  -1.0,
    };
    Eigen::MatrixXd w(10, 10);
    for (Eigen::Index j = 0; j < 10; ++j)
        for (Eigen::Index i = 0; i < 10; ++i)
            w(j, i) = values[static_cast<std::size_t>(j * 10 + i)];
    return WeightMatrix(std::move(w));
}

PsiPpiGrid psi_ppi(const WeightMatrix& weights, const CodeMatrix& codes)
{
    if (codes.neurons() != weights.size())
        mismatch("code matrix has " + std::to_string(codes.neurons()) +
                 " neurons, weights have " + std::to_string(weights.size()));
    if (codes.steps() == 0)
        mismatch("code matrix has no time steps");

    const Eigen::VectorXd activity =
        codes.entries.cast<double>().rowwise().sum() / static_cast<double>(codes.steps());
    PsiPpiGrid out;
    out.grid = weights.entries() * activity.asDiagonal();
    out.psi = out.grid.rowwise().sum();
    out.ppi = out.grid.colwise().sum().transpose();
    return out;
}

BinaryVector fire_step(const BinaryVector& input, const WeightMatrix& weights,
                       double fire_threshold)
{
    if (input.size() != weights.size())
        mismatch("input column has " + std::to_string(input.size()) + " entries, weights have " +
                 std::to_string(weights.size()) + " neurons");
    const Eigen::VectorXd drive = weights.entries() * input.cast<double>();
    return (drive.array() > fire_threshold).cast<std::uint8_t>();
}

void write_code_matrix_csv(const CodeMatrix& codes, std::ostream& out)
{
    for (std::size_t j = 0; j < codes.neuron_labels.size(); ++j)
        out << (j ? "," : "") << codes.neuron_labels[j];
    out << '\n';
    for (Eigen::Index k = 0; k < codes.steps(); ++k) {
        for (Eigen::Index j = 0; j < codes.neurons(); ++j)
            out << (j ? "," : "") << static_cast<int>(codes.entries(j, k));
        out << '\n';
    }
}

void write_psi_ppi_csv(const PsiPpiGrid& grid, std::span<const std::string> labels,
                       std::ostream& out)
{
    const auto n = grid.grid.rows();
    if (static_cast<Eigen::Index>(labels.size()) != n)
        mismatch("label count does not match grid size");
    out << "post\\pre";
    for (const auto& l : labels)
        out << ',' << l;
    out << ",psi\n";
    for (Eigen::Index j = 0; j < n; ++j) {
        out << labels[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < n; ++i)
            out << ',' << detail::format_shortest(grid.grid(j, i));
        out << ',' << detail::format_shortest(grid.psi(j)) << '\n';
    }
    out << "ppi";
    for (Eigen::Index i = 0; i < n; ++i)
        out << ',' << detail::format_shortest(grid.ppi(i));
    out << ",\n";
}

void write_weights_csv(const WeightMatrix& weights, std::ostream& out)
{
    const auto& w = weights.entries();
    for (Eigen::Index j = 0; j < w.rows(); ++j) {
        for (Eigen::Index i = 0; i < w.cols(); ++i)
            out << (i ? "," : "") << detail::format_shortest(w(j, i));
        out << '\n';
    }
}

WeightMatrix read_weights_csv(std::istream& in)
{
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = detail::trim(line);
        if (text.empty() || text.front() == '#')
            continue;
        std::vector<double> row;
        for (auto f : detail::split_csv(text)) {
            auto v = detail::parse_double(f);
            if (!v)
                throw Error(ErrorKind::Parse,
                            "weights line " + std::to_string(line_no) + ": malformed number");
            row.push_back(*v);
        }
        rows.push_back(std::move(row));
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd w(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(j)].size()) != n)
            mismatch("weights CSV is not square");
        for (Eigen::Index i = 0; i < n; ++i)
            w(j, i) = rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    }
    return WeightMatrix(std::move(w));
}

void write_heatmap_svg(const Eigen::MatrixXd& grid, std::span<const std::string> labels,
                       const std::string& title, std::ostream& out)
{
    const auto n = grid.rows();
    if (grid.cols() != n || static_cast<Eigen::Index>(labels.size()) != n)
        mismatch("heatmap needs a square grid with one label per row");

    constexpr int cell = 36, margin_left = 140, margin_top = 60, legend_h = 50;
    const int width = margin_left + static_cast<int>(n) * cell + 20;
    const int height = margin_top + static_cast<int>(n) * cell + legend_h + 60;

    const double lo = n ? grid.minCoeff() : 0.0;
    const double hi = n ? grid.maxCoeff() : 0.0;
    // Light green (low) to dark blue (high).
    constexpr std::array<double, 3> low_rgb = {199, 233, 180};
    constexpr std::array<double, 3> high_rgb = {8, 29, 88};
    auto colour = [&](double v) {
        const double f = hi > lo ? (v - lo) / (hi - lo) : 0.5;
        char buf[8];
        std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                      static_cast<int>(std::lround(low_rgb[0] + f * (high_rgb[0] - low_rgb[0]))),
                      static_cast<int>(std::lround(low_rgb[1] + f * (high_rgb[1] - low_rgb[1]))),
                      static_cast<int>(std::lround(low_rgb[2] + f * (high_rgb[2] - low_rgb[2]))));
        return std::string(buf);
    };
    auto escape = [](const std::string& s) {
        std::string r;
        for (char c : s) {
            switch (c) {
            case '<': r += "&lt;"; break;
            case '>': r += "&gt;"; break;
            case '&': r += "&amp;"; break;
            case '"': r += "&quot;"; break;
            default: r += c;
            }
        }
        return r;
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
    out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << escape(title) << "</text>\n";
    out << "<text x=\"" << margin_left + n * cell / 2 << "\" y=\"40\" text-anchor=\"middle\">"
        << "pre-synaptic</text>\n";
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& label = labels[static_cast<std::size_t>(j)];
        out << "<text x=\"" << margin_left - 6 << "\" y=\"" << margin_top + j * cell + cell / 2 + 3
            << "\" text-anchor=\"end\">" << escape(label) << "</text>\n";
        for (Eigen::Index i = 0; i < n; ++i) {
            out << "<rect x=\"" << margin_left + i * cell << "\" y=\"" << margin_top + j * cell
                << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
                << colour(grid(j, i)) << "\"><title>" << escape(label) << " &lt;- "
                << escape(labels[static_cast<std::size_t>(i)]) << ": "
                << detail::format_sig9(grid(j, i)) << "</title></rect>\n";
        }
    }
    const int ly = margin_top + static_cast<int>(n) * cell + 20;
    out << "<defs><linearGradient id=\"ramp\"><stop offset=\"0\" stop-color=\"" << colour(lo)
        << "\"/><stop offset=\"1\" stop-color=\"" << colour(hi) << "\"/></linearGradient></defs>\n";
    out << "<rect x=\"" << margin_left << "\" y=\"" << ly << "\" width=\"" << n * cell
        << "\" height=\"12\" fill=\"url(#ramp)\"/>\n";
    out << "<text x=\"" << margin_left << "\" y=\"" << ly + 26 << "\">"
        << detail::format_sig9(lo) << "</text>\n";
    out << "<text x=\"" << margin_left + n * cell << "\" y=\"" << ly + 26
        << "\" text-anchor=\"end\">" << detail::format_sig9(hi) << "</text>\n";
    out << "</svg>\n";
}

namespace {

template <typename Derived>
nlohmann::ordered_json rows_to_json(const Eigen::MatrixBase<Derived>& m)
{
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < m.rows(); ++j) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index i = 0; i < m.cols(); ++i)
            row.push_back(m(j, i));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

nlohmann::ordered_json to_json(const CodeMatrix& codes)
{
    nlohmann::ordered_json j;
    j["neuron_labels"] = codes.neuron_labels;
    j["time_base_s"] = codes.time_base;
    j["entries"] = rows_to_json(codes.entries.cast<int>());
    return j;
}

nlohmann::ordered_json to_json(const WeightMatrix& weights)
{
    return rows_to_json(weights.entries());
}

nlohmann::ordered_json to_json(const PsiPpiGrid& grid)
{
    nlohmann::ordered_json j;
    j["psi"] = std::vector<double>(grid.psi.data(), grid.psi.data() + grid.psi.size());
    j["ppi"] = std::vector<double>(grid.ppi.data(), grid.ppi.data() + grid.ppi.size());
    j["grid"] = rows_to_json(grid.grid);
    return j;
}

} // namespace protoneuro::coding
