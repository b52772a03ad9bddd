#pragma once

#include <Eigen/Core>
#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace protoneuro::sim {

/// Leaky integrate-and-fire constants. Potentials in volts, times in seconds.
struct LifParameters {
    double tau_m = 0.020;
    double v_th = -0.050;
    double v_reset = -0.065;
    double v_rest = -0.065;
    double refractory = 0.002;
    double dt = 1e-4;
    double tau_syn = 0.005; // exponential filter on the readout
};

void validate(const LifParameters& lif);

struct LifState {
    Eigen::VectorXd v;               // membrane potential
    Eigen::VectorXd refractory_left; // s; > dt/2 means the neuron is clamped

    static LifState at_rest(Eigen::Index n, const LifParameters& lif);
};

struct LifStepResult {
    LifState state;
    Eigen::VectorXd spikes; // 0/1
};

/// One forward-Euler step:
///   v += dt/tau_m * (v_rest - v) + dt * input + J * spikes_prev
/// i.e. a presynaptic spike is a current pulse of area J(i, j) that moves
/// v_i by J(i, j) volts. Neurons in their refractory period are held at
/// v_reset. A neuron whose updated potential exceeds v_th spikes, is reset,
/// and is clamped for round(refractory / dt) steps.
///
/// `input` is in volts per second (drive already divided by capacitance).
LifStepResult step_lif(const LifState& state, const Eigen::VectorXd& input,
                       const LifParameters& lif, const Eigen::MatrixXd& recurrent,
                       const Eigen::VectorXd& spikes_prev);

// Recurrent LIF network with input synapses U and readout synapses W.
struct SpikingNetwork {
    Eigen::MatrixXd recurrent; // N x N
    Eigen::MatrixXd input;     // N x d_in
    Eigen::MatrixXd output;    // d_out x N
    LifParameters lif;

    Eigen::Index neurons() const { return recurrent.rows(); }
};

// Continuous-variable network: tau dx/dt = -x + J tanh(x) + U Fin + u Fout.
struct RateNetwork {
    Eigen::MatrixXd recurrent; // N x N
    Eigen::MatrixXd input;     // N x d_in
    Eigen::MatrixXd feedback;  // N x d_out
    double tau = 0.010;
    double dt = 1e-4;

    Eigen::Index units() const { return recurrent.rows(); }
};

void validate(const SpikingNetwork& net);
void validate(const RateNetwork& net);

struct SpikeEvent {
    Eigen::Index neuron;
    double time;
    friend bool operator==(const SpikeEvent&, const SpikeEvent&) = default;
};

struct SimulationTrace {
    std::vector<double> times;     // end of each step
    Eigen::MatrixXd values;        // N x steps: membrane potential or tanh activity
    Eigen::MatrixXd states;        // rate runs only: pre-nonlinearity x
    std::vector<SpikeEvent> raster;
    Eigen::MatrixXd output;        // d_out x steps (spiking runs)
};

/// Iterates step_lif over the columns of `drive` (d_in x steps). The readout
/// is Fout = W * r with r_j <- r_j * exp(-dt / tau_syn) + s_j / tau_syn, so r
/// is an exponentially filtered firing rate in Hz.
SimulationTrace run_spiking(const SpikingNetwork& net, const Eigen::MatrixXd& drive,
                            std::optional<LifState> initial = std::nullopt);

/// Forward Euler on tau dx/dt = -x + J r + U Fin + u Fout_fb with r = tanh(x).
/// `feedback` may be empty when the network has no feedback synapses.
SimulationTrace run_rate(const RateNetwork& net, const Eigen::MatrixXd& drive,
                         const Eigen::MatrixXd& feedback,
                         std::optional<Eigen::VectorXd> initial = std::nullopt);

/// Inter-spike period of a single LIF neuron under constant drive (V/s) with
/// reset to rest, ignoring discretisation: refractory + tau_m * ln(I/(I - dV))
/// with I = tau_m * drive and dV = v_th - v_rest. Empty below rheobase.
std::optional<double> analytic_lif_period(const LifParameters& lif, double drive);

// JSON network specs. Shapes and parameters are required; weight arrays are
// optional and otherwise drawn from `seed`.
struct SpikingRun {
    SpikingNetwork net;
    Eigen::MatrixXd drive;
};
struct RateRun {
    RateNetwork net;
    Eigen::MatrixXd drive;
    Eigen::MatrixXd feedback;
};
SpikingRun spiking_run_from_json(const nlohmann::json& spec, std::uint64_t seed,
                                 const LifParameters& base_lif = {});
RateRun rate_run_from_json(const nlohmann::json& spec, std::uint64_t seed);
LifParameters lif_from_json(const nlohmann::json& j, LifParameters base = {});

// `time_s,neuron,value` long format.
void write_trace_csv(const SimulationTrace& trace, std::ostream& out);
// `neuron,spike_time_s`
void write_raster_csv(const SimulationTrace& trace, std::ostream& out);
// `time_s,output,value`
void write_output_csv(const SimulationTrace& trace, std::ostream& out);

} // namespace protoneuro::sim
