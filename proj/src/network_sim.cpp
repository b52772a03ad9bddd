#include "protoneuro/network_sim.hpp"

#include "protoneuro/error.hpp"
#include "protoneuro/random.hpp"
#include "text.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

namespace protoneuro::sim {

namespace {

[[noreturn]] void shape_error(const std::string& what)
{
    throw Error(ErrorKind::DimensionMismatch, what);
}

void require_param(bool ok, const std::string& what)
{
    if (!ok)
        throw Error(ErrorKind::Validation, what);
}

bool all_finite(const Eigen::MatrixXd& m)
{
    return m.allFinite();
}

std::string shape(const Eigen::MatrixXd& m)
{
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

} // namespace

void validate(const LifParameters& lif)
{
    require_param(std::isfinite(lif.tau_m) && lif.tau_m > 0.0, "lif.tau_m must be > 0");
    require_param(std::isfinite(lif.v_th) && std::isfinite(lif.v_reset) &&
                      std::isfinite(lif.v_rest),
                  "lif potentials must be finite");
    require_param(lif.v_th > lif.v_reset, "lif.v_th must exceed lif.v_reset");
    require_param(std::isfinite(lif.dt) && lif.dt > 0.0, "lif.dt must be > 0");
    require_param(std::isfinite(lif.refractory) && lif.refractory >= 0.0,
                  "lif.refractory must be >= 0");
    require_param(lif.refractory == 0.0 || lif.dt <= lif.refractory,
                  "lif.dt must not exceed lif.refractory");
    require_param(std::isfinite(lif.tau_syn) && lif.tau_syn > 0.0, "lif.tau_syn must be > 0");
}

LifState LifState::at_rest(Eigen::Index n, const LifParameters& lif)
{
    return {Eigen::VectorXd::Constant(n, lif.v_rest), Eigen::VectorXd::Zero(n)};
}

LifStepResult step_lif(const LifState& state, const Eigen::VectorXd& input,
                       const LifParameters& lif, const Eigen::MatrixXd& recurrent,
                       const Eigen::VectorXd& spikes_prev)
{
    const auto n = state.v.size();
    if (state.refractory_left.size() != n || input.size() != n || spikes_prev.size() != n ||
        recurrent.rows() != n || recurrent.cols() != n)
        shape_error("step_lif: inconsistent shapes for " + std::to_string(n) + " neurons");
    if (!state.v.allFinite() || !state.refractory_left.allFinite())
        throw Error(ErrorKind::NonFinite, "step_lif: non-finite membrane state");

    const double leak = lif.dt / lif.tau_m;
    const Eigen::VectorXd synaptic = recurrent * spikes_prev;

    LifStepResult out{state, Eigen::VectorXd::Zero(n)};
    auto& v = out.state.v;
    auto& clock = out.state.refractory_left;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (clock(i) > 0.5 * lif.dt) {
            v(i) = lif.v_reset;
            clock(i) -= lif.dt;
            continue;
        }
        clock(i) = 0.0;
        v(i) += leak * (lif.v_rest - v(i)) + lif.dt * input(i) + synaptic(i);
        if (v(i) > lif.v_th) {
            out.spikes(i) = 1.0;
            v(i) = lif.v_reset;
            clock(i) = lif.refractory;
        }
    }
    if (!v.allFinite())
        throw Error(ErrorKind::NonFinite, "step_lif: membrane potential diverged");
    return out;
}

void validate(const SpikingNetwork& net)
{
    validate(net.lif);
    const auto n = net.recurrent.rows();
    if (n < 1 || net.recurrent.cols() != n)
        shape_error("recurrent weights must be square, got " + shape(net.recurrent));
    if (net.input.rows() != n)
        shape_error("input weights must have " + std::to_string(n) + " rows, got " +
                    shape(net.input));
    if (net.output.cols() != n)
        shape_error("output weights must have " + std::to_string(n) + " columns, got " +
                    shape(net.output));
    require_param(all_finite(net.recurrent) && all_finite(net.input) && all_finite(net.output),
                  "network weights must be finite");
}

void validate(const RateNetwork& net)
{
    const auto n = net.recurrent.rows();
    if (n < 1 || net.recurrent.cols() != n)
        shape_error("recurrent weights must be square, got " + shape(net.recurrent));
    if (net.input.rows() != n)
        shape_error("input weights must have " + std::to_string(n) + " rows, got " +
                    shape(net.input));
    if (net.feedback.rows() != n && net.feedback.size() != 0)
        shape_error("feedback weights must have " + std::to_string(n) + " rows, got " +
                    shape(net.feedback));
    require_param(std::isfinite(net.tau) && net.tau > 0.0, "rate tau must be > 0");
    require_param(std::isfinite(net.dt) && net.dt > 0.0, "rate dt must be > 0");
    require_param(all_finite(net.recurrent) && all_finite(net.input) && all_finite(net.feedback),
                  "network weights must be finite");
}

SimulationTrace run_spiking(const SpikingNetwork& net, const Eigen::MatrixXd& drive,
                            std::optional<LifState> initial)
{
    validate(net);
    const auto n = net.neurons();
    if (drive.rows() != net.input.cols())
        shape_error("drive has " + std::to_string(drive.rows()) + " channels, network expects " +
                    std::to_string(net.input.cols()));
    const auto steps = drive.cols();
    const auto& lif = net.lif;

    LifState state = initial ? std::move(*initial) : LifState::at_rest(n, lif);
    Eigen::VectorXd spikes = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd filtered = Eigen::VectorXd::Zero(n);
    const double decay = std::exp(-lif.dt / lif.tau_syn);

    SimulationTrace trace;
    trace.times.reserve(static_cast<std::size_t>(steps));
    trace.values.resize(n, steps);
    trace.output.resize(net.output.rows(), steps);

    for (Eigen::Index k = 0; k < steps; ++k) {
        const Eigen::VectorXd current = net.input * drive.col(k);
        auto result = step_lif(state, current, lif, net.recurrent, spikes);
        state = std::move(result.state);
        spikes = std::move(result.spikes);

        const double t = static_cast<double>(k + 1) * lif.dt;
        trace.times.push_back(t);
        trace.values.col(k) = state.v;
        for (Eigen::Index i = 0; i < n; ++i)
            if (spikes(i) > 0.0)
                trace.raster.push_back({i, t});
        filtered = filtered * decay + spikes / lif.tau_syn;
        trace.output.col(k) = net.output * filtered;
    }
    return trace;
}

SimulationTrace run_rate(const RateNetwork& net, const Eigen::MatrixXd& drive,
                         const Eigen::MatrixXd& feedback, std::optional<Eigen::VectorXd> initial)
{
    validate(net);
    const auto n = net.units();
    if (drive.rows() != net.input.cols())
        shape_error("drive has " + std::to_string(drive.rows()) + " channels, network expects " +
                    std::to_string(net.input.cols()));
    const auto steps = drive.cols();
    const bool use_feedback = net.feedback.size() != 0;
    if (use_feedback && (feedback.rows() != net.feedback.cols() || feedback.cols() != steps))
        shape_error("feedback signal must be " + std::to_string(net.feedback.cols()) + "x" +
                    std::to_string(steps) + ", got " + shape(feedback));
    if (initial && initial->size() != n)
        shape_error("initial state has wrong length");

    Eigen::VectorXd x = initial ? std::move(*initial) : Eigen::VectorXd::Zero(n);
    Eigen::VectorXd r = x.array().tanh();
    const double h = net.dt / net.tau;

    SimulationTrace trace;
    trace.times.reserve(static_cast<std::size_t>(steps));
    trace.values.resize(n, steps);
    trace.states.resize(n, steps);
    for (Eigen::Index k = 0; k < steps; ++k) {
        Eigen::VectorXd dx = -x + net.recurrent * r + net.input * drive.col(k);
        if (use_feedback)
            dx += net.feedback * feedback.col(k);
        x += h * dx;
        if (!x.allFinite())
            throw Error(ErrorKind::NonFinite, "run_rate: state diverged");
        r = x.array().tanh();
        trace.times.push_back(static_cast<double>(k + 1) * net.dt);
        trace.states.col(k) = x;
        trace.values.col(k) = r;
    }
    return trace;
}

std::optional<double> analytic_lif_period(const LifParameters& lif, double drive)
{
    const double i_eff = lif.tau_m * drive;
    const double gap = lif.v_th - lif.v_rest;
    if (!(i_eff > gap))
        return std::nullopt;
    return lif.refractory + lif.tau_m * std::log(i_eff / (i_eff - gap));
}

namespace {

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols,
                                 const std::string& name)
{
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
        shape_error(name + " must have " + std::to_string(rows) + " rows");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            shape_error(name + " row " + std::to_string(r) + " must have " +
                        std::to_string(cols) + " entries");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, double scale, std::uint64_t seed)
{
    Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = scale * rng.normal();
    return m;
}

Eigen::MatrixXd uniform(Eigen::Index rows, Eigen::Index cols, double scale, std::uint64_t seed)
{
    Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = scale * rng.uniform(-1.0, 1.0);
    return m;
}

Eigen::Index get_dim(const nlohmann::json& spec, const char* key, Eigen::Index fallback = -1)
{
    if (!spec.contains(key)) {
        if (fallback >= 0)
            return fallback;
        throw Error(ErrorKind::Validation, std::string("network spec missing '") + key + "'");
    }
    const auto v = spec.at(key).get<long long>();
    if (v < 0)
        throw Error(ErrorKind::Validation, std::string("network spec '") + key + "' must be >= 0");
    return static_cast<Eigen::Index>(v);
}

// `steps` or `duration_s`, and an input description:
//   {"constant": [c1, ..., c_d]} or {"sine": {"amplitude", "frequency_hz", "offset"}}
Eigen::MatrixXd drive_from_json(const nlohmann::json& spec, Eigen::Index channels, double dt,
                                const char* key)
{
    Eigen::Index steps = 0;
    if (spec.contains("steps"))
        steps = get_dim(spec, "steps");
    else if (spec.contains("duration_s"))
        steps = static_cast<Eigen::Index>(std::llround(spec.at("duration_s").get<double>() / dt));
    else
        throw Error(ErrorKind::Validation, "network spec needs 'steps' or 'duration_s'");

    Eigen::MatrixXd drive = Eigen::MatrixXd::Zero(channels, steps);
    if (!spec.contains(key))
        return drive;
    const auto& in = spec.at(key);
    if (in.contains("constant")) {
        const auto& c = in.at("constant");
        if (!c.is_array() || static_cast<Eigen::Index>(c.size()) != channels)
            shape_error(std::string(key) + ".constant must have " + std::to_string(channels) +
                        " entries");
        for (Eigen::Index r = 0; r < channels; ++r)
            drive.row(r).setConstant(c[static_cast<std::size_t>(r)].get<double>());
    } else if (in.contains("sine")) {
        const auto& s = in.at("sine");
        const double amp = s.value("amplitude", 1.0);
        const double freq = s.value("frequency_hz", 1.0);
        const double offset = s.value("offset", 0.0);
        for (Eigen::Index k = 0; k < steps; ++k) {
            const double t = static_cast<double>(k) * dt;
            drive.col(k).setConstant(offset + amp * std::sin(2.0 * std::numbers::pi * freq * t));
        }
    } else {
        throw Error(ErrorKind::Validation, std::string(key) + " must be 'constant' or 'sine'");
    }
    return drive;
}

} // namespace

LifParameters lif_from_json(const nlohmann::json& j, LifParameters lif)
{
    lif.tau_m = j.value("tau_m", lif.tau_m);
    lif.v_th = j.value("v_th", lif.v_th);
    lif.v_reset = j.value("v_reset", lif.v_reset);
    lif.v_rest = j.value("v_rest", lif.v_rest);
    lif.refractory = j.value("refractory", lif.refractory);
    lif.dt = j.value("dt", lif.dt);
    lif.tau_syn = j.value("tau_syn", lif.tau_syn);
    return lif;
}

SpikingRun spiking_run_from_json(const nlohmann::json& spec, std::uint64_t seed,
                                 const LifParameters& base_lif)
{
    try {
        const auto n = get_dim(spec, "neurons");
        const auto d_in = get_dim(spec, "inputs", 1);
        const auto d_out = get_dim(spec, "outputs", 1);
        seed = spec.value("seed", seed);

        SpikingRun run;
        run.net.lif = lif_from_json(spec.value("lif", nlohmann::json::object()), base_lif);
        const double gain = spec.value("recurrent_gain", 0.0);
        const double in_scale = spec.value("input_scale", 1.0);
        const double out_scale = spec.value("output_scale", 1.0);
        run.net.recurrent =
            spec.contains("recurrent_weights")
                ? matrix_from_json(spec["recurrent_weights"], n, n, "recurrent_weights")
                : gaussian(n, n, gain / std::sqrt(static_cast<double>(std::max<Eigen::Index>(n, 1))),
                           derive_seed(seed, "sim.spiking.recurrent"));
        run.net.input = spec.contains("input_weights")
                            ? matrix_from_json(spec["input_weights"], n, d_in, "input_weights")
                            : uniform(n, d_in, in_scale, derive_seed(seed, "sim.spiking.input"));
        run.net.output =
            spec.contains("output_weights")
                ? matrix_from_json(spec["output_weights"], d_out, n, "output_weights")
                : uniform(d_out, n, out_scale, derive_seed(seed, "sim.spiking.output"));
        validate(run.net);
        run.drive = drive_from_json(spec, d_in, run.net.lif.dt, "drive");
        return run;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("network spec: ") + e.what());
    }
}

RateRun rate_run_from_json(const nlohmann::json& spec, std::uint64_t seed)
{
    try {
        const auto n = get_dim(spec, "units");
        const auto d_in = get_dim(spec, "inputs", 1);
        const auto d_out = get_dim(spec, "feedback_channels", 0);
        seed = spec.value("seed", seed);

        RateRun run;
        run.net.tau = spec.value("tau", run.net.tau);
        run.net.dt = spec.value("dt", run.net.dt);
        const double gain = spec.value("recurrent_gain", 1.0);
        const double in_scale = spec.value("input_scale", 1.0);
        const double fb_scale = spec.value("feedback_scale", 1.0);
        run.net.recurrent =
            spec.contains("recurrent_weights")
                ? matrix_from_json(spec["recurrent_weights"], n, n, "recurrent_weights")
                : gaussian(n, n, gain / std::sqrt(static_cast<double>(std::max<Eigen::Index>(n, 1))),
                           derive_seed(seed, "sim.rate.recurrent"));
        run.net.input = spec.contains("input_weights")
                            ? matrix_from_json(spec["input_weights"], n, d_in, "input_weights")
                            : uniform(n, d_in, in_scale, derive_seed(seed, "sim.rate.input"));
        run.net.feedback =
            spec.contains("feedback_weights")
                ? matrix_from_json(spec["feedback_weights"], n, d_out, "feedback_weights")
                : uniform(n, d_out, fb_scale, derive_seed(seed, "sim.rate.feedback"));
        validate(run.net);
        run.drive = drive_from_json(spec, d_in, run.net.dt, "drive");
        run.feedback = drive_from_json(spec, d_out, run.net.dt, "feedback");
        return run;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("network spec: ") + e.what());
    }
}

void write_trace_csv(const SimulationTrace& trace, std::ostream& out)
{
    out << "time_s,neuron,value\n";
    for (Eigen::Index k = 0; k < trace.values.cols(); ++k) {
        const auto t = detail::format_shortest(trace.times[static_cast<std::size_t>(k)]);
        for (Eigen::Index i = 0; i < trace.values.rows(); ++i)
            out << t << ',' << i << ',' << detail::format_shortest(trace.values(i, k)) << '\n';
    }
}

void write_raster_csv(const SimulationTrace& trace, std::ostream& out)
{
    out << "neuron,spike_time_s\n";
    for (const auto& e : trace.raster)
        out << e.neuron << ',' << detail::format_shortest(e.time) << '\n';
}

void write_output_csv(const SimulationTrace& trace, std::ostream& out)
{
    out << "time_s,output,value\n";
    for (Eigen::Index k = 0; k < trace.output.cols(); ++k) {
        const auto t = detail::format_shortest(trace.times[static_cast<std::size_t>(k)]);
        for (Eigen::Index o = 0; o < trace.output.rows(); ++o)
            out << t << ',' << o << ',' << detail::format_shortest(trace.output(o, k)) << '\n';
    }
}

} // namespace protoneuro::sim
