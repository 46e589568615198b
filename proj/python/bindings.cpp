// Python bindings for the fracdens core: noise synthesis, stationary
// sampling, density estimation, bandwidth selection, and the study drivers.
// Study configurations cross the boundary as JSON text so that the Python
// layer can work with plain dicts.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracdens/concentration.hpp"
#include "fracdens/density.hpp"
#include "fracdens/errors.hpp"
#include "fracdens/fbm.hpp"
#include "fracdens/kernels.hpp"
#include "fracdens/rates.hpp"
#include "fracdens/sde.hpp"
#include "fracdens/selection.hpp"
#include "fracdens/studies.hpp"

namespace py = pybind11;
using namespace fracdens;

namespace {

FgnMethod method_from_name(const std::string& name) {
    if (name == "auto") return FgnMethod::automatic;
    if (name == "circulant") return FgnMethod::circulant_fft;
    if (name == "cholesky") return FgnMethod::cholesky;
    if (name == "white") return FgnMethod::white_noise;
    throw std::invalid_argument("method must be auto, circulant, cholesky, or white");
}

py::array_t<double> matrix_array(const std::vector<double>& data, std::size_t rows,
                                 std::size_t cols) {
    py::array_t<double> out({rows, cols});
    std::copy(data.begin(), data.end(), out.mutable_data());
    return out;
}

Json parse_config(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& err) {
        throw ConfigError(std::string("invalid JSON: ") + err.what());
    }
}

ObservationSet observations_from_array(const py::array_t<double, py::array::c_style |
                                                                     py::array::forcecast>& x,
                                       double delta) {
    if (x.ndim() != 2) throw std::invalid_argument("observations must be a 2-d array (n, dim)");
    ObservationSet obs;
    obs.n = static_cast<std::size_t>(x.shape(0));
    obs.dim = static_cast<int>(x.shape(1));
    obs.delta = delta;
    obs.x.assign(x.data(), x.data() + x.size());
    return obs;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stationary-density toolkit for additive fractional SDEs";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);

    // ---------------- fractional Gaussian noise ----------------
    m.def("fgn_autocovariance", &fgn_autocovariance, py::arg("hurst"), py::arg("lag"),
          py::arg("delta") = 1.0,
          "Autocovariance of fractional Gaussian noise increments at the given lag.");

    m.def(
        "generate_fgn",
        [](double hurst, std::size_t steps, double delta, int dim, std::uint64_t seed,
           const std::string& method) {
            const FgnSample sample =
                generate_fgn(HurstParam(hurst), steps, delta, dim, seed, method_from_name(method));
            return matrix_array(sample.increments, sample.steps,
                                static_cast<std::size_t>(sample.dim));
        },
        py::arg("hurst"), py::arg("steps"), py::arg("delta") = 1.0, py::arg("dim") = 1,
        py::arg("seed") = 1, py::arg("method") = "auto",
        "Exact fractional Gaussian noise, shape (steps, dim).");

    // ---------------- models and stationary sampling ----------------
    py::class_<ModelSpec>(m, "Model")
        .def_readonly("dim", &ModelSpec::dim)
        .def_readonly("hurst", &ModelSpec::hurst)
        .def_readonly("alpha", &ModelSpec::alpha)
        .def_readonly("lipschitz", &ModelSpec::lipschitz)
        .def_readonly("name", &ModelSpec::name)
        .def("__repr__", [](const ModelSpec& model) {
            return "<Model " + model.name + " dim=" + std::to_string(model.dim) +
                   " H=" + format_double(model.hurst) + ">";
        });

    m.def("make_fou", &make_fou, py::arg("theta"), py::arg("sigma"), py::arg("hurst"),
          py::arg("dim") = 1, "Mean-reverting drift -theta x with constant scalar noise.");
    m.def("make_linear", &make_linear, py::arg("a"), py::arg("sigma"), py::arg("hurst"),
          py::arg("dim"), "Linear drift -A x (row-major A, sigma).");
    m.def("make_tanh", &make_tanh, py::arg("theta"), py::arg("c"), py::arg("sigma"),
          py::arg("hurst"), py::arg("dim") = 1, "Drift -theta x - c tanh(x) per coordinate.");

    m.def(
        "sample_stationary",
        [](const ModelSpec& model, std::size_t n, double delta, std::uint64_t seed, double burn_in,
           double sim_step) {
            const SamplingGrid grid = SamplingGrid::make(n, delta, model.alpha, burn_in, sim_step);
            const ObservationSet obs = sample_stationary(model, grid, seed);
            return matrix_array(obs.x, obs.n, static_cast<std::size_t>(obs.dim));
        },
        py::arg("model"), py::arg("n"), py::arg("delta"), py::arg("seed") = 1,
        py::arg("burn_in") = -1.0, py::arg("sim_step") = -1.0,
        "Stationary observations delta apart after burn-in, shape (n, dim).");

    m.def(
        "stationary_covariance",
        [](const ModelSpec& model) {
            const GaussianLaw law = stationary_gaussian(model);
            return matrix_array(law.cov, static_cast<std::size_t>(law.dim),
                                static_cast<std::size_t>(law.dim));
        },
        py::arg("model"), "Stationary covariance of a linear model (quadrature).");

    m.def(
        "stationary_pdf",
        [](const ModelSpec& model, const std::vector<double>& x) {
            return stationary_gaussian(model).pdf_at(x);
        },
        py::arg("model"), py::arg("x"), "Stationary Gaussian density of a linear model at x.");

    // ---------------- density estimation and bandwidth selection ----------------
    m.def(
        "estimate_density",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x, double delta,
           int kernel_order, const std::vector<double>& h, const std::vector<double>& x0) {
            const ObservationSet obs = observations_from_array(x, delta);
            return estimate_at(obs, make_kernel(kernel_order), Bandwidth(h), x0);
        },
        py::arg("observations"), py::arg("delta"), py::arg("kernel_order"), py::arg("h"),
        py::arg("x0"), "Product-kernel density estimate at x0.");

    m.def(
        "select_bandwidth",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x, double delta,
           double hurst, int kernel_order, double kappa, double p, const std::vector<double>& x0) {
            const ObservationSet obs = observations_from_array(x, delta);
            const BandwidthGrid grid =
                build_grid(obs.dim, static_cast<double>(obs.n) * delta, HurstParam(hurst));
            const SelectionResult result =
                select(obs, make_kernel(kernel_order), grid, x0, kappa, p);
            py::dict out;
            out["index"] = result.index;
            out["h"] = result.h.h;
            out["estimate"] = result.estimate;
            out["criterion"] = result.criterion;
            out["estimates"] = result.diagnostics.estimates;
            out["bias_term"] = result.diagnostics.bias_term;
            out["majorants"] = result.diagnostics.majorants;
            py::list levels;
            for (const std::vector<int>& level : grid.levels) levels.append(level);
            out["grid_levels"] = levels;
            return out;
        },
        py::arg("observations"), py::arg("delta"), py::arg("hurst"), py::arg("kernel_order") = 1,
        py::arg("kappa") = 1.0, py::arg("p") = 2.0, py::arg("x0") = std::vector<double>{0.0},
        "Goldenshluger-Lepski bandwidth selection at x0; returns the full diagnostics.");

    // ---------------- rates ----------------
    m.def(
        "rate_exponents",
        [](double hurst) {
            const RateExponents exponents = rate_exponents(hurst);
            return py::make_tuple(exponents.a, exponents.beta);
        },
        py::arg("hurst"), "Exponent pair (a, beta) with a = max(2H,1), beta = min(1, 2-2H).");

    m.def(
        "gamma_exponent",
        [](const std::vector<double>& s, const std::vector<double>& big_l) {
            return gamma_exponent(HolderClass(s, big_l));
        },
        py::arg("s"), py::arg("L"), "Rate exponent gamma(s).");

    m.def(
        "oracle_bandwidth",
        [](const std::vector<double>& s, const std::vector<double>& big_l, double n_delta,
           double hurst) { return oracle_bandwidth(HolderClass(s, big_l), n_delta, hurst); },
        py::arg("s"), py::arg("L"), py::arg("n_delta"), py::arg("hurst"),
        "Risk-optimal bandwidth for the given smoothness and horizon.");

    m.def(
        "adaptive_target",
        [](const std::vector<double>& s, const std::vector<double>& big_l, double n_delta,
           double hurst) {
            const AdaptiveTarget target =
                adaptive_bandwidth_star(HolderClass(s, big_l), n_delta, hurst);
            py::dict out;
            out["levels"] = target.levels;
            out["h"] = target.h;
            out["log_corrected"] = target.log_corrected;
            return out;
        },
        py::arg("s"), py::arg("L"), py::arg("n_delta"), py::arg("hurst"),
        "Grid-aligned adaptive bandwidth target (levels, h, log-corrected bracket).");

    // ---------------- study drivers (JSON text in, JSON text out) ----------------
    m.def(
        "run_risk_study_json",
        [](const std::string& config_text) {
            const RiskStudyConfig config = RiskStudyConfig::from_json(parse_config(config_text));
            return risk_study_json(run_risk_study(config)).dump();
        },
        py::arg("config_json"), "Risk study from a JSON config string; returns JSON text.");

    m.def(
        "run_rate_study_json",
        [](const std::string& config_text) {
            const RateStudyConfig config = RateStudyConfig::from_json(parse_config(config_text));
            return rate_study_json(run_rate_study(config)).dump();
        },
        py::arg("config_json"), "Rate study from a JSON config string; returns JSON text.");

    m.def(
        "run_concentration_study_json",
        [](const std::string& config_text) {
            const ConcStudyConfig config = ConcStudyConfig::from_json(parse_config(config_text));
            return conc_study_json(run_concentration_study(config)).dump();
        },
        py::arg("config_json"),
        "Concentration study from a JSON config string; returns JSON text.");
}
