#include "protoneuro/dpv_waveform.hpp"
#include "protoneuro/error.hpp"
#include "protoneuro/network_sim.hpp"
#include "protoneuro/qsar_model.hpp"
#include "protoneuro/signal_io.hpp"
#include "protoneuro/spike_analysis.hpp"
#include "protoneuro/temporal_coding.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <vector>

namespace py = pybind11;
using namespace protoneuro;

namespace {

TimeSeries series_from(std::vector<double> times, std::vector<double> values,
                       const std::string& label)
{
    return TimeSeries(std::move(times), std::move(values), Unit::Microampere, label);
}

py::dict train_dict(const SpikeTrain& train)
{
    py::dict d;
    d["spike_times"] = train.spike_times;
    d["spike_amplitudes"] = train.spike_amplitudes;
    d["label"] = train.source_label;
    d["duration"] = train.duration;
    return d;
}

qsar::QsarCoefficients coeffs_from(const std::vector<double>& values)
{
    if (values.size() != qsar::kTerms)
        throw Error(ErrorKind::DimensionMismatch, "expected 9 coefficients");
    qsar::QsarCoefficients c;
    std::copy(values.begin(), values.end(), c.values.begin());
    return c;
}

std::vector<qsar::QsarObservation> observations_from(const std::vector<double>& x,
                                                     const std::vector<double>& y,
                                                     const std::vector<double>& rate)
{
    if (x.size() != y.size() || x.size() != rate.size())
        throw Error(ErrorKind::DimensionMismatch, "x, y and rate must have equal length");
    std::vector<qsar::QsarObservation> obs;
    for (std::size_t i = 0; i < x.size(); ++i)
        obs.push_back({{"s" + std::to_string(i), x[i], y[i]}, rate[i]});
    return obs;
}

} // namespace

PYBIND11_MODULE(_protoneuro, m)
{
    m.doc() = "Proteinoid proto-neural network toolkit";
    m.attr("__version__") = "0.1.0";

    static py::exception<Error> error_type(m, "ProtoneuroError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error_type,
                          (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
        }
    });

    py::class_<dpv::DpvParameters>(m, "DpvParameters")
        .def(py::init<>())
        .def_readwrite("equilibrium_time", &dpv::DpvParameters::equilibrium_time)
        .def_readwrite("start_potential", &dpv::DpvParameters::start_potential)
        .def_readwrite("end_potential", &dpv::DpvParameters::end_potential)
        .def_readwrite("step_size", &dpv::DpvParameters::step_size)
        .def_readwrite("pulse_amplitude", &dpv::DpvParameters::pulse_amplitude)
        .def_readwrite("pulse_width", &dpv::DpvParameters::pulse_width)
        .def_readwrite("scan_rate", &dpv::DpvParameters::scan_rate);

    m.def("step_count", &dpv::step_count, py::arg("params") = dpv::DpvParameters{});
    m.def("scan_duration", &dpv::scan_duration, py::arg("params") = dpv::DpvParameters{});
    m.def(
        "generate_waveform",
        [](const dpv::DpvParameters& p) {
            const auto wf = dpv::generate_waveform(p);
            std::vector<py::tuple> rows;
            rows.reserve(wf.segments.size());
            for (const auto& s : wf.segments)
                rows.push_back(py::make_tuple(s.start_time, s.duration, s.potential,
                                              dpv::to_string(s.phase)));
            return rows;
        },
        py::arg("params") = dpv::DpvParameters{},
        "List of (start_time, duration, potential, phase) segments.");
    m.def(
        "sample_instants",
        [](const dpv::DpvParameters& p) {
            std::vector<std::pair<double, std::string>> out;
            for (const auto& s : dpv::sample_instants(p))
                out.emplace_back(s.time, dpv::to_string(s.kind));
            return out;
        },
        py::arg("params") = dpv::DpvParameters{});

    m.def(
        "synthesize",
        [](double duration, std::size_t count, double mean_isi, double jitter,
           double amplitude, double half_width, double noise_sd, double sample_interval,
           std::uint64_t seed, std::optional<std::vector<double>> spike_times) {
            SyntheticSpikeSpec spec;
            spec.duration = duration;
            spec.count = count;
            spec.mean_isi = mean_isi;
            spec.jitter_fraction = jitter;
            spec.spike_amplitude = amplitude;
            spec.spike_half_width = half_width;
            spec.noise_sd = noise_sd;
            spec.sample_interval = sample_interval;
            spec.seed = seed;
            spec.spike_times = std::move(spike_times);
            const auto s = synthesize_spiky_series(spec);
            return py::make_tuple(std::vector<double>(s.times().begin(), s.times().end()),
                                  std::vector<double>(s.values().begin(), s.values().end()));
        },
        py::arg("duration") = 1000.0, py::arg("count") = 0, py::arg("mean_isi") = 10.0,
        py::arg("jitter") = 0.0, py::arg("amplitude") = 0.001, py::arg("half_width") = 1.0,
        py::arg("noise_sd") = 0.0, py::arg("sample_interval") = 1.0, py::arg("seed") = 0,
        py::arg("spike_times") = py::none(),
        "Synthetic spiky current trace; returns (times, values).");

    m.def(
        "detect_spikes",
        [](std::vector<double> times, std::vector<double> values, double threshold,
           double min_distance, bool naive) {
            const auto s = series_from(std::move(times), std::move(values), "");
            const SpikeDetectionConfig cfg{threshold, min_distance};
            return train_dict(naive ? detect_spikes_naive(s, cfg) : detect_spikes(s, cfg));
        },
        py::arg("times"), py::arg("values"), py::arg("threshold") = 0.0005,
        py::arg("min_distance") = 5.0, py::arg("naive") = false);

    m.def(
        "compute_stats",
        [](std::vector<double> spike_times, double duration) {
            SpikeTrain t;
            t.spike_times = std::move(spike_times);
            t.spike_amplitudes.assign(t.spike_times.size(), 0.0);
            t.duration = duration;
            return to_json(compute_stats(t)).dump();
        },
        py::arg("spike_times"), py::arg("duration") = 0.0,
        "Spike statistics as a JSON string.");

    m.def(
        "encode",
        [](const Eigen::MatrixXd& potentials, double theta) {
            return coding::encode(potentials, theta).entries;
        },
        py::arg("potentials"), py::arg("theta"));
    m.def("table1_fixture", [] { return coding::table1_fixture().entries(); });
    m.def(
        "init_weights",
        [](std::size_t n, std::uint64_t seed) { return coding::init_weights(n, seed).entries(); },
        py::arg("neuron_count"), py::arg("seed"));
    m.def(
        "psi_ppi",
        [](const Eigen::MatrixXd& weights, const coding::BinaryMatrix& codes) {
            coding::CodeMatrix c{codes, {}, 1.0};
            const auto g = coding::psi_ppi(coding::WeightMatrix(weights), c);
            return py::make_tuple(g.psi, g.ppi, g.grid);
        },
        py::arg("weights"), py::arg("codes"), "Returns (psi, ppi, grid).");
    m.def(
        "fire_step",
        [](const coding::BinaryVector& input, const Eigen::MatrixXd& weights, double threshold) {
            return coding::fire_step(input, coding::WeightMatrix(weights), threshold);
        },
        py::arg("input"), py::arg("weights"), py::arg("fire_threshold") = 0.0);

    m.def(
        "predict",
        [](std::optional<std::vector<double>> coeffs, double x, double y) {
            return qsar::predict(coeffs ? coeffs_from(*coeffs) : qsar::published_coefficients(), x, y);
        },
        py::arg("coefficients"), py::arg("x"), py::arg("y"),
        "Evaluate the cubic surface; coefficients=None uses the published surface.");
    m.def("published_coefficients", [] {
        const auto c = qsar::published_coefficients();
        return std::vector<double>(c.values.begin(), c.values.end());
    });
    m.def(
        "fit",
        [](const std::vector<double>& x, const std::vector<double>& y,
           const std::vector<double>& rate, double level) {
            const auto obs = observations_from(x, y, rate);
            const auto r = qsar::fit(obs);
            py::dict d;
            d["coefficients"] =
                std::vector<double>(r.coefficients.values.begin(), r.coefficients.values.end());
            d["rss"] = r.residual_sum_of_squares;
            if (obs.size() > qsar::kTerms) {
                std::vector<std::pair<double, double>> b;
                for (const auto& iv : qsar::confidence_bounds(r, obs, level))
                    b.emplace_back(iv.low, iv.high);
                d["bounds"] = b;
            } else {
                d["bounds"] = py::none();
            }
            return d;
        },
        py::arg("x"), py::arg("y"), py::arg("rate"), py::arg("level") = 0.95);
    m.def("percent_deviation", &qsar::percent_deviation, py::arg("mean"), py::arg("predicted"));

    py::class_<sim::LifParameters>(m, "LifParameters")
        .def(py::init<>())
        .def_readwrite("tau_m", &sim::LifParameters::tau_m)
        .def_readwrite("v_th", &sim::LifParameters::v_th)
        .def_readwrite("v_reset", &sim::LifParameters::v_reset)
        .def_readwrite("v_rest", &sim::LifParameters::v_rest)
        .def_readwrite("refractory", &sim::LifParameters::refractory)
        .def_readwrite("dt", &sim::LifParameters::dt)
        .def_readwrite("tau_syn", &sim::LifParameters::tau_syn);

    m.def("analytic_lif_period", &sim::analytic_lif_period, py::arg("lif"), py::arg("drive"));
    m.def(
        "run_spiking",
        [](const Eigen::MatrixXd& recurrent, const Eigen::MatrixXd& input,
           const Eigen::MatrixXd& output, const sim::LifParameters& lif,
           const Eigen::MatrixXd& drive) {
            const auto tr = sim::run_spiking({recurrent, input, output, lif}, drive);
            std::vector<std::pair<Eigen::Index, double>> raster;
            for (const auto& e : tr.raster)
                raster.emplace_back(e.neuron, e.time);
            py::dict d;
            d["times"] = tr.times;
            d["v"] = tr.values;
            d["raster"] = raster;
            d["output"] = tr.output;
            return d;
        },
        py::arg("recurrent"), py::arg("input"), py::arg("output"), py::arg("lif"),
        py::arg("drive"));
    m.def(
        "run_rate",
        [](const Eigen::MatrixXd& recurrent, const Eigen::MatrixXd& input, double tau, double dt,
           const Eigen::MatrixXd& drive) {
            sim::RateNetwork net{recurrent, input, Eigen::MatrixXd(recurrent.rows(), 0), tau, dt};
            const auto tr = sim::run_rate(net, drive, Eigen::MatrixXd());
            py::dict d;
            d["times"] = tr.times;
            d["r"] = tr.values;
            d["x"] = tr.states;
            return d;
        },
        py::arg("recurrent"), py::arg("input"), py::arg("tau"), py::arg("dt"),
        py::arg("drive"));
}
