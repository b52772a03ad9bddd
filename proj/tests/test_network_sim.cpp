#include "protoneuro/error.hpp"
#include "protoneuro/network_sim.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace protoneuro;
using namespace protoneuro::sim;
namespace pt = protoneuro::testing;

namespace {

SpikingNetwork single_neuron(LifParameters lif)
{
    return {Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1),
            lif};
}

std::vector<double> spike_times(const SimulationTrace& tr, Eigen::Index neuron = 0)
{
    std::vector<double> t;
    for (const auto& e : tr.raster)
        if (e.neuron == neuron)
            t.push_back(e.time);
    return t;
}

Eigen::MatrixXd constant_drive(double value, double duration, double dt)
{
    return Eigen::MatrixXd::Constant(1, static_cast<Eigen::Index>(std::llround(duration / dt)),
                                     value);
}

} // namespace

TEST(StepLif, RestIsAFixedPoint)
{
    const LifParameters lif;
    auto state = LifState::at_rest(3, lif);
    Eigen::VectorXd spikes = Eigen::VectorXd::Zero(3);
    for (int k = 0; k < 1000; ++k) {
        auto r = step_lif(state, Eigen::VectorXd::Zero(3), lif, Eigen::MatrixXd::Zero(3, 3), spikes);
        state = r.state;
        spikes = r.spikes;
        ASSERT_EQ(spikes.sum(), 0.0);
    }
    EXPECT_TRUE((state.v.array() == lif.v_rest).all());
}

TEST(StepLif, ShapeAndFiniteChecks)
{
    const LifParameters lif;
    auto state = LifState::at_rest(2, lif);
    try {
        step_lif(state, Eigen::VectorXd::Zero(3), lif, Eigen::MatrixXd::Zero(2, 2),
                 Eigen::VectorXd::Zero(2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
    state.v(0) = NAN;
    try {
        step_lif(state, Eigen::VectorXd::Zero(2), lif, Eigen::MatrixXd::Zero(2, 2),
                 Eigen::VectorXd::Zero(2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonFinite);
    }
}

TEST(StepLif, RecurrentSpikeMovesPotentialByWeight)
{
    LifParameters lif;
    const auto state = LifState::at_rest(2, lif);
    Eigen::MatrixXd j(2, 2);
    j << 0.0, 0.004, 0.0, 0.0;
    Eigen::VectorXd prev(2);
    prev << 0.0, 1.0;
    const auto r = step_lif(state, Eigen::VectorXd::Zero(2), lif, j, prev);
    EXPECT_NEAR(r.state.v(0), lif.v_rest + 0.004, 1e-15);
    EXPECT_EQ(r.state.v(1), lif.v_rest);
}

TEST(Lif, PeriodMatchesClosedFormWithoutRefractory)
{
    LifParameters lif;
    lif.refractory = 0.0;
    const double drive = 1.2 * (lif.v_th - lif.v_rest) / lif.tau_m;
    const double period = lif.tau_m * std::log(1.2 / 0.2);
    EXPECT_NEAR(*analytic_lif_period(lif, drive), period, 1e-15);

    const auto tr = run_spiking(single_neuron(lif), constant_drive(drive, 2.0, lif.dt));
    const auto t = spike_times(tr);
    ASSERT_GT(t.size(), 10u);
    for (std::size_t k = 1; k < t.size(); ++k)
        EXPECT_LT(pt::rel_err(t[k] - t[k - 1], period), 0.01);
}

TEST(Lif, PeriodIncludesRefractoryTime)
{
    const LifParameters lif;
    for (double drive : {0.9, 1.5, 3.0}) {
        const auto period = analytic_lif_period(lif, drive);
        ASSERT_TRUE(period);
        const auto t = spike_times(run_spiking(single_neuron(lif), constant_drive(drive, 2.0, lif.dt)));
        ASSERT_GT(t.size(), 10u);
        const double mean = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
        EXPECT_LT(pt::rel_err(mean, *period), 0.01) << drive;
    }
}

TEST(Lif, SubthresholdDriveNeverSpikes)
{
    const LifParameters lif;
    const double rheobase = (lif.v_th - lif.v_rest) / lif.tau_m;
    EXPECT_FALSE(analytic_lif_period(lif, rheobase));
    const auto tr = run_spiking(single_neuron(lif), constant_drive(0.99 * rheobase, 5.0, lif.dt));
    EXPECT_TRUE(tr.raster.empty());
    EXPECT_LT(tr.values.maxCoeff(), lif.v_th);
}

TEST(Lif, HalvingDtKeepsSpikeTimes)
{
    LifParameters coarse;
    auto fine = coarse;
    fine.dt = coarse.dt / 2.0;
    for (double drive : {0.9, 1.5, 3.0}) {
        const auto a = spike_times(run_spiking(single_neuron(coarse), constant_drive(drive, 10.0, coarse.dt)));
        const auto b = spike_times(run_spiking(single_neuron(fine), constant_drive(drive, 10.0, fine.dt)));
        ASSERT_FALSE(a.empty());
        const auto n = std::min(a.size(), b.size());
        EXPECT_LE(std::max(a.size(), b.size()) - n, 1 + n / 50);
        for (std::size_t k = 0; k < n; ++k)
            EXPECT_LT(std::abs(a[k] - b[k]), static_cast<double>(k + 1) * coarse.dt)
                << "drive " << drive << " spike " << k;
    }
}

TEST(RunSpiking, ZeroNetworkIsSilent)
{
    const LifParameters lif;
    const SpikingNetwork net{Eigen::MatrixXd::Zero(4, 4), Eigen::MatrixXd::Zero(4, 2),
                             Eigen::MatrixXd::Zero(3, 4), lif};
    const auto tr = run_spiking(net, Eigen::MatrixXd::Zero(2, 500));
    EXPECT_TRUE(tr.raster.empty());
    EXPECT_EQ(tr.output.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(tr.output.rows(), 3);
    EXPECT_EQ(tr.times.size(), 500u);
    EXPECT_NEAR(tr.times.back(), 0.05, 1e-15);
}

TEST(RunSpiking, ReadoutIsPeriodicFilteredTrain)
{
    const LifParameters lif;
    const double drive = 1.5;
    const auto tr = run_spiking(single_neuron(lif), constant_drive(drive, 1.0, lif.dt));
    const auto t = spike_times(tr);
    ASSERT_GT(t.size(), 5u);
    // Identical inter-spike intervals after the first spike, and the readout
    // jumps by exactly 1/tau_syn at every spike.
    for (std::size_t k = 2; k < t.size(); ++k)
        EXPECT_NEAR(t[k] - t[k - 1], t[1] - t[0], 1e-9);
    EXPECT_LT(pt::rel_err(t[1] - t[0], *analytic_lif_period(lif, drive)), 0.01);
    const double decay = std::exp(-lif.dt / lif.tau_syn);
    for (Eigen::Index k = 1; k < tr.output.cols(); ++k) {
        const double predicted = tr.output(0, k - 1) * decay;
        const double jump = tr.output(0, k) - predicted;
        const bool spiked = std::abs(jump - 1.0 / lif.tau_syn) < 1e-6;
        EXPECT_TRUE(spiked || std::abs(jump) < 1e-9) << k;
    }
}

TEST(RunSpiking, ShapeMismatch)
{
    const LifParameters lif;
    try {
        run_spiking(single_neuron(lif), Eigen::MatrixXd::Zero(2, 10));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
    SpikingNetwork bad = single_neuron(lif);
    bad.output = Eigen::MatrixXd::Zero(1, 2);
    EXPECT_THROW(run_spiking(bad, Eigen::MatrixXd::Zero(1, 10)), Error);
}

// Random recurrent networks: determinism, refractory spacing and the
// membrane bound for nonnegative input without recurrence.
TEST(RunSpiking, RandomNetworkProperties)
{
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        LifParameters lif;
        const Eigen::Index n = 2 + trial % 6;
        SpikingNetwork net{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, 1),
                           Eigen::MatrixXd::Ones(1, n), lif};
        const bool recurrent = trial % 2 == 1;
        for (Eigen::Index i = 0; i < n; ++i) {
            net.input(i, 0) = 0.5 + 2.5 * u(gen);
            for (Eigen::Index j = 0; recurrent && j < n; ++j)
                net.recurrent(i, j) = i == j ? 0.0 : 0.004 * (u(gen) - 0.3);
        }
        Eigen::MatrixXd drive(1, 3000);
        for (Eigen::Index k = 0; k < drive.cols(); ++k)
            drive(0, k) = u(gen);

        const auto a = run_spiking(net, drive);
        const auto b = run_spiking(net, drive);
        EXPECT_EQ(a.raster, b.raster);
        EXPECT_EQ(a.values, b.values);

        for (Eigen::Index i = 0; i < n; ++i) {
            const auto t = spike_times(a, i);
            for (std::size_t k = 1; k < t.size(); ++k)
                EXPECT_GE(t[k] - t[k - 1], lif.refractory - 1e-12);
        }

        if (!recurrent) {
            // Reconstruct the pre-reset potential at every spike.
            const double max_input = net.input.maxCoeff() * drive.maxCoeff();
            for (const auto& e : a.raster) {
                const auto k = static_cast<Eigen::Index>(std::llround(e.time / lif.dt)) - 1;
                ASSERT_GE(k, 1);
                const double prev = a.values(e.neuron, k - 1);
                const double pre = prev + lif.dt / lif.tau_m * (lif.v_rest - prev) +
                                   lif.dt * net.input(e.neuron, 0) * drive(0, k);
                EXPECT_GT(pre, lif.v_th);
                EXPECT_LE(pre, lif.v_th + lif.dt * max_input);
            }
        }
    }
}

TEST(RunRate, ZeroInputStaysAtZero)
{
    const RateNetwork net{Eigen::MatrixXd::Constant(3, 3, 0.4), Eigen::MatrixXd::Ones(3, 1),
                          Eigen::MatrixXd(3, 0)};
    const auto tr = run_rate(net, Eigen::MatrixXd::Zero(1, 200), Eigen::MatrixXd());
    EXPECT_EQ(tr.states.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(tr.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(RunRate, FirstOrderResponse)
{
    const double c = 0.7;
    RateNetwork net{Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd(1, 0)};
    const auto steps = static_cast<Eigen::Index>(std::llround(5.0 * net.tau / net.dt));
    const auto tr = run_rate(net, Eigen::MatrixXd::Constant(1, steps, c), Eigen::MatrixXd());
    for (Eigen::Index k = 0; k < steps; ++k) {
        const double analytic = c * (1.0 - std::exp(-tr.times[static_cast<std::size_t>(k)] / net.tau));
        EXPECT_LT(std::abs(tr.states(0, k) - analytic), 0.01 * c);
    }
    EXPECT_LT(pt::rel_err(tr.states(0, steps - 1), c), 0.01);
    EXPECT_NEAR(tr.values(0, steps - 1), std::tanh(tr.states(0, steps - 1)), 1e-15);
}

TEST(RunRate, ErrorShrinksWithDt)
{
    // Linearised single unit: tau x' = -x + a x + c, solved in closed form.
    const double a = 0.2, c = 0.3, tau = 0.010, horizon = 5.0 * tau;
    double last = INFINITY;
    for (double h : {1e-2, 1e-3, 1e-4}) {
        RateNetwork net{Eigen::MatrixXd::Constant(1, 1, a), Eigen::MatrixXd::Ones(1, 1),
                        Eigen::MatrixXd(1, 0), tau, h * tau};
        const auto steps = static_cast<Eigen::Index>(std::llround(horizon / net.dt));
        // Keep x tiny so tanh(x) is linear to machine precision.
        const double scale = 1e-6;
        const auto tr = run_rate(net, Eigen::MatrixXd::Constant(1, steps, c * scale), Eigen::MatrixXd());
        const double lambda = (1.0 - a) / tau;
        const double xinf = c * scale / (1.0 - a);
        double err = 0.0;
        for (Eigen::Index k = 0; k < steps; ++k) {
            const double t = tr.times[static_cast<std::size_t>(k)];
            err = std::max(err, std::abs(tr.states(0, k) - xinf * (1.0 - std::exp(-lambda * t))) / xinf);
        }
        EXPECT_LT(err, last) << h;
        last = err;
    }
    EXPECT_LT(last, 1e-3);
}

TEST(RunRate, ActivityBoundedForLargeInputs)
{
    std::mt19937_64 gen(3);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd j(5, 5), in(5, 2), fb(5, 1);
    for (Eigen::Index k = 0; k < j.size(); ++k)
        j.data()[k] = 3.0 * g(gen);
    for (Eigen::Index k = 0; k < in.size(); ++k)
        in.data()[k] = g(gen);
    fb.setConstant(0.5);
    RateNetwork net{j, in, fb};
    Eigen::MatrixXd drive(2, 1000), feedback(1, 1000);
    for (Eigen::Index k = 0; k < drive.size(); ++k)
        drive.data()[k] = 1e3 * g(gen);
    feedback.setConstant(-50.0);
    const auto tr = run_rate(net, drive, feedback);
    EXPECT_LE(tr.values.cwiseAbs().maxCoeff(), 1.0);
    EXPECT_THROW(run_rate(net, drive, Eigen::MatrixXd::Zero(1, 999)), Error);
}

TEST(NetworkJson, SpikingSpecWithExplicitWeights)
{
    const auto spec = nlohmann::json::parse(R"({
        "neurons": 2, "inputs": 1, "outputs": 1,
        "recurrent_weights": [[0, 0.001], [0.001, 0]],
        "input_weights": [[1], [0.5]],
        "output_weights": [[1, 1]],
        "lif": {"refractory": 0.003},
        "steps": 100,
        "drive": {"constant": [2.0]}
    })");
    const auto run = spiking_run_from_json(spec, 1);
    EXPECT_EQ(run.net.recurrent(0, 1), 0.001);
    EXPECT_EQ(run.net.input(1, 0), 0.5);
    EXPECT_EQ(run.net.lif.refractory, 0.003);
    EXPECT_EQ(run.drive.cols(), 100);
    EXPECT_EQ(run.drive(0, 50), 2.0);
}

TEST(NetworkJson, SeededWeightsAreDeterministic)
{
    const auto spec = nlohmann::json::parse(
        R"({"neurons": 5, "recurrent_gain": 0.01, "duration_s": 0.01, "drive": {"sine": {"amplitude": 2}}})");
    const auto a = spiking_run_from_json(spec, 9);
    const auto b = spiking_run_from_json(spec, 9);
    const auto c = spiking_run_from_json(spec, 10);
    EXPECT_EQ(a.net.recurrent, b.net.recurrent);
    EXPECT_NE(a.net.recurrent, c.net.recurrent);
    EXPECT_EQ(a.drive.cols(), 100);
}

TEST(NetworkJson, Errors)
{
    auto expect_kind = [](const char* text, ErrorKind kind) {
        try {
            spiking_run_from_json(nlohmann::json::parse(text), 0);
            ADD_FAILURE() << text;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), kind) << text << ": " << e.what();
        }
    };
    expect_kind(R"({"steps": 10})", ErrorKind::Validation);
    expect_kind(R"({"neurons": 2})", ErrorKind::Validation);
    expect_kind(R"({"neurons": 2, "steps": 5, "input_weights": [[1]]})", ErrorKind::DimensionMismatch);
    expect_kind(R"({"neurons": "two", "steps": 5})", ErrorKind::Parse);
}

TEST(NetworkJson, RateSpec)
{
    const auto spec = nlohmann::json::parse(
        R"({"units": 4, "inputs": 2, "feedback_channels": 1, "tau": 0.02, "dt": 0.001,
            "steps": 50, "drive": {"constant": [0.1, 0.2]}, "feedback": {"constant": [0.5]}})");
    const auto run = rate_run_from_json(spec, 4);
    EXPECT_EQ(run.net.feedback.cols(), 1);
    EXPECT_EQ(run.feedback.cols(), 50);
    const auto tr = run_rate(run.net, run.drive, run.feedback);
    EXPECT_EQ(tr.values.cols(), 50);
}

TEST(SimulationCsv, Layouts)
{
    SimulationTrace tr;
    tr.times = {0.001, 0.002};
    tr.values = Eigen::MatrixXd(2, 2);
    tr.values << -0.065, -0.06, -0.064, -0.065;
    tr.output = Eigen::MatrixXd::Constant(1, 2, 0.5);
    tr.raster = {{1, 0.002}};
    std::ostringstream a, b, c;
    write_trace_csv(tr, a);
    write_raster_csv(tr, b);
    write_output_csv(tr, c);
    EXPECT_EQ(a.str(), "time_s,neuron,value\n0.001,0,-0.065\n0.001,1,-0.064\n"
                       "0.002,0,-0.06\n0.002,1,-0.065\n");
    EXPECT_EQ(b.str(), "neuron,spike_time_s\n1,0.002\n");
    EXPECT_EQ(c.str(), "time_s,output,value\n0.001,0,0.5\n0.002,0,0.5\n");
}
