#include <optional>
#include <tuple>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "specfactor/error.hpp"
#include "specfactor/estimator.hpp"
#include "specfactor/free_model.hpp"
#include "specfactor/residual.hpp"
#include "specfactor/spectral.hpp"
#include "specfactor/synthetic.hpp"
#include "specfactor/window.hpp"

namespace py = pybind11;
using namespace specfactor;

namespace {

EstimatorConfig make_estimator(int p_max, std::vector<double> phi_grid, bool refine, int bins, const std::string& grid,
                               bool linear_assignment, unsigned threads) {
    EstimatorConfig cfg;
    cfg.p_max = p_max;
    cfg.phi_grid = std::move(phi_grid);
    cfg.refine = refine;
    cfg.binning.bin_count = bins;
    cfg.grid = grid_mode_from_string(grid);
    cfg.linear_assignment = linear_assignment;
    cfg.threads = threads;
    return cfg;
}

py::dict result_dict(const EstimationResult& r, bool with_surface) {
    py::dict d;
    d["p_hat"] = r.p_hat;
    d["phi_hat"] = r.phi_hat;
    d["d_min"] = r.d_min;
    if (with_surface) {
        py::list surface;
        for (const auto& s : r.surface) surface.append(py::make_tuple(s.p, s.phi, s.divergence));
        d["surface"] = surface;
    }
    return d;
}

py::tuple density_tuple(const SpectralDensity& rho) { return py::make_tuple(rho.edges(), rho.mass()); }

}  // namespace

PYBIND11_MODULE(_specfactor, m) {
    m.doc() = "Factor count and residual scale from residual spectra";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

#define ESTIMATOR_ARGS                                                                                            \
    py::arg("p_max") = -1, py::arg("phi_grid") = std::vector<double>{}, py::arg("refine") = false,                 \
        py::arg("bins") = 50, py::arg("grid") = "equiprobable", py::arg("linear_assignment") = true,               \
        py::arg("threads") = 0u

    m.def(
        "estimate",
        [](const Eigen::MatrixXd& data, int p_max, std::vector<double> phi_grid, bool refine, int bins,
           const std::string& grid, bool linear_assignment, unsigned threads, bool surface) {
            const auto cfg = make_estimator(p_max, std::move(phi_grid), refine, bins, grid, linear_assignment, threads);
            EstimationResult r;
            {
                py::gil_scoped_release release;
                r = estimate(DataMatrix(data), cfg);
            }
            return result_dict(r, surface);
        },
        py::arg("data"), ESTIMATOR_ARGS, py::arg("surface") = false,
        "Estimate (p_hat, phi_hat) for an N x T matrix; returns a dict.");

    m.def(
        "sliding_estimates",
        [](const Eigen::MatrixXd& data, int width, int step, int p_max, std::vector<double> phi_grid, bool refine,
           int bins, const std::string& grid, bool linear_assignment, unsigned threads) {
            WindowConfig cfg;
            cfg.width = width;
            cfg.step = step;
            cfg.estimator = make_estimator(p_max, std::move(phi_grid), refine, bins, grid, linear_assignment, threads);
            WindowSeries s;
            {
                py::gil_scoped_release release;
                s = sliding_estimates(DataMatrix(data), cfg);
            }
            py::list out;
            for (const auto& e : s.entries) {
                py::dict d;
                d["end_index"] = e.end_index;
                d["p_hat"] = e.ok() ? py::object(py::int_(e.p_hat)) : py::object(py::none());
                d["phi_hat"] = e.ok() ? py::object(py::float_(e.phi_hat)) : py::object(py::none());
                d["d_min"] = e.ok() ? py::object(py::float_(e.d_min)) : py::object(py::none());
                d["error"] = e.error;
                out.append(d);
            }
            return out;
        },
        py::arg("data"), py::arg("width") = 200, py::arg("step") = 1, ESTIMATOR_ARGS,
        "Per-window estimates; failed windows carry error text and None values.");
#undef ESTIMATOR_ARGS

    m.def(
        "model_density",
        [](double phi, std::vector<double> edges, double epsilon) {
            return density_tuple(model_density(phi, edges, epsilon));
        },
        py::arg("phi"), py::arg("edges"), py::arg("epsilon") = 0.0, "(edges, masses) of the product law on edges.");
    m.def(
        "model_support", [](double phi) {
            const auto s = model_support(phi);
            return py::make_tuple(s.lower, s.upper);
        },
        py::arg("phi"));
    m.def("model_quantiles", &model_quantiles, py::arg("phi"), py::arg("bins"));
    m.def("green_function", [](std::complex<double> z, double phi) { return green_function(z, phi).g; },
          py::arg("z"), py::arg("phi"));

    m.def(
        "esd",
        [](std::vector<double> eigenvalues, std::vector<double> edges, bool clip) {
            return density_tuple(esd(EigenSpectrum(std::move(eigenvalues)), edges, clip));
        },
        py::arg("eigenvalues"), py::arg("edges"), py::arg("clip") = false);
    m.def(
        "mp_density",
        [](double c, std::vector<double> edges, double sigma2) {
            return density_tuple(mp_density_on_grid(c, sigma2, edges));
        },
        py::arg("c"), py::arg("edges"), py::arg("sigma2") = 1.0);
    m.def(
        "js_divergence",
        [](std::vector<double> edges, std::vector<double> a, std::vector<double> b) {
            return js_divergence(SpectralDensity(edges, std::move(a)), SpectralDensity(edges, std::move(b)));
        },
        py::arg("edges"), py::arg("a"), py::arg("b"), "JS divergence (natural log) of two mass vectors on shared edges.");

    m.def(
        "residual_spectrum",
        [](const Eigen::MatrixXd& data, int p) { return residual_spectrum(DataMatrix(data), p).values(); },
        py::arg("data"), py::arg("p"), "Eigenvalues of the standardized residual covariance after removing p factors.");

    m.def(
        "generate_factor_data",
        [](int n, int t, int p, std::optional<double> gamma, std::optional<double> snr, double alpha, double beta,
           int j, std::uint64_t seed) {
            if (gamma && snr) throw ConfigError("give gamma or snr, not both");
            SyntheticConfig cfg;
            cfg.n = n;
            cfg.t = t;
            cfg.p = p;
            if (gamma) cfg.gamma = *gamma;
            if (snr) cfg.gamma = SyntheticConfig::gamma_for_snr(p, *snr);
            cfg.alpha = alpha;
            cfg.beta = beta;
            cfg.j = j;
            cfg.seed = seed;
            return generate_factor_data(cfg).values();
        },
        py::arg("n") = 100, py::arg("t") = 100, py::arg("p") = 3, py::arg("gamma") = py::none(),
        py::arg("snr") = py::none(), py::arg("alpha") = 0.0, py::arg("beta") = 0.0, py::arg("j") = 0,
        py::arg("seed") = 1);
    m.def(
        "generate_iid_check_data",
        [](int n, int t, std::uint64_t seed) { return generate_iid_check_data(n, t, seed).values(); }, py::arg("n"),
        py::arg("t"), py::arg("seed") = 1);
    m.def(
        "generate_scenario",
        [](int n, int t, std::vector<std::tuple<int, int, double>> events, std::vector<double> base_level, double snr,
           double ar_coeff, double coupling, std::uint64_t seed) {
            ScenarioConfig cfg;
            cfg.n = n;
            cfg.t = t;
            for (const auto& [row, start, level] : events) cfg.events.push_back({row, start, level});
            cfg.base_level = std::move(base_level);
            cfg.snr = snr;
            cfg.ar_coeff = ar_coeff;
            cfg.coupling = coupling;
            cfg.seed = seed;
            return generate_scenario(cfg).values();
        },
        py::arg("n") = 118, py::arg("t") = 1000, py::arg("events") = std::vector<std::tuple<int, int, double>>{},
        py::arg("base_level") = std::vector<double>{20.0}, py::arg("snr") = 1000.0, py::arg("ar_coeff") = 0.5,
        py::arg("coupling") = 0.5, py::arg("seed") = 1, "events are (row, start, level) with 0-based rows, 1-based starts.");
    m.def(
        "sample_wishart_product",
        [](int n_dim, double phi, std::uint64_t seed) { return sample_wishart_product(n_dim, phi, seed).values(); },
        py::arg("n_dim"), py::arg("phi"), py::arg("seed") = 1);
}
