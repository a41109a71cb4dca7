// specfactor command-line tool: estimate, surface, model-density, synth, scenario,
// window and mp-check subcommands over CSV matrices.

#include <CLI11.hpp>

#include <cmath>
#include <deque>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specfactor/error.hpp"
#include "specfactor/estimator.hpp"
#include "specfactor/free_model.hpp"
#include "specfactor/io.hpp"
#include "specfactor/residual.hpp"
#include "specfactor/synthetic.hpp"
#include "specfactor/window.hpp"

using namespace specfactor;

namespace {

// Flags that map one-to-one onto config keys. Parsed as text and funnelled through
// RunConfig so that file values and flags share validation.
struct KeyFlags {
    std::deque<std::pair<std::string, std::string>> bindings;  // key, value; deque keeps references stable
    std::vector<std::pair<std::string, CLI::Option*>> options;

    void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
        auto& slot = bindings.emplace_back(key, std::string{});
        options.emplace_back(key, app->add_option(flag, slot.second, help));
    }

    RunConfig resolve(const std::string& config_path) const {
        RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::from_file(config_path);
        for (std::size_t i = 0; i < options.size(); ++i) {
            if (options[i].second->count() > 0) {
                cfg.set(bindings[i].first, bindings[i].second);
            }
        }
        return cfg;
    }
};

void add_estimator_flags(CLI::App* app, KeyFlags& keys) {
    keys.add(app, "--p-max", "p_max", "largest factor count tried (default min(20, N/5))");
    keys.add(app, "--phi-grid", "phi_grid", "phi values: comma list or lo:step:hi (default 0.01:0.01:1)");
    keys.add(app, "--refine", "refine", "refine phi at step 0.001 around each optimum (true/false)");
    keys.add(app, "--bins", "bin_count", "model cells in the comparison grid (default 50)");
    keys.add(app, "--grid", "grid", "equiprobable or shared_support");
    keys.add(app, "--epsilon", "epsilon", "Stieltjes inversion offset for shared_support grids");
    keys.add(app, "--threads", "threads", "worker cap (default SPECFACTOR_THREADS or all cores)");
}

std::unique_ptr<std::ostream> open_output(const std::string& path) {
    if (path.empty() || path == "-") {
        return nullptr;
    }
    auto out = std::make_unique<std::ofstream>(path);
    if (!*out) {
        throw ConfigError("cannot open output file '" + path + "'");
    }
    return out;
}

template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
    auto file = open_output(path);
    std::ostream& os = file ? *file : std::cout;
    fn(os);
    os.flush();
    if (!os) {
        throw DataError("failed writing output '" + path + "'");
    }
}

DataMatrix load(const std::string& path) { return DataMatrix(read_matrix_csv_file(path)); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Factor model estimation by matching residual spectra to a free Wishart product law"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output;
    std::string matrix_path;
    std::optional<std::uint64_t> seed;

    // estimate
    KeyFlags est_keys;
    std::string surface_path;
    auto* est = app.add_subcommand("estimate", "estimate (p, phi) for a matrix CSV; JSON on stdout");
    est->add_option("matrix", matrix_path, "N x T matrix CSV")->required();
    est->add_option("--config", config_path, "key = value config file");
    est->add_option("--surface", surface_path, "also write the (p, phi, divergence) surface CSV here");
    est->add_option("--seed", seed, "accepted for uniformity; estimation is deterministic");
    add_estimator_flags(est, est_keys);

    // surface
    KeyFlags surf_keys;
    auto* surf = app.add_subcommand("surface", "write the full divergence surface CSV");
    surf->add_option("matrix", matrix_path, "N x T matrix CSV")->required();
    surf->add_option("--config", config_path, "key = value config file");
    surf->add_option("-o,--output", output, "output CSV (default stdout)");
    surf->add_option("--seed", seed, "accepted for uniformity; estimation is deterministic");
    add_estimator_flags(surf, surf_keys);

    // model-density
    double md_phi = 0.5;
    int md_bins = 100;
    std::optional<double> md_lo;
    std::optional<double> md_hi;
    double md_eps = 0.0;
    auto* md = app.add_subcommand("model-density", "tabulate the model density (bin midpoint, mass) as TSV");
    md->add_option("--phi", md_phi, "aspect ratio in (0, 1]")->required();
    md->add_option("--bins", md_bins, "bin count (default 100)");
    md->add_option("--lo", md_lo, "grid start (default 0)");
    md->add_option("--hi", md_hi, "grid end (default 1.1 x upper support edge)");
    md->add_option("--epsilon", md_eps, "inversion offset (default automatic)");
    md->add_option("-o,--output", output, "output TSV (default stdout)");
    md->add_option("--seed", seed, "accepted for uniformity; the density is deterministic");

    // synth
    KeyFlags syn_keys;
    auto* syn = app.add_subcommand("synth", "generate Monte Carlo factor data as CSV");
    syn->add_option("--config", config_path, "key = value config file");
    syn->add_option("-o,--output", output, "output CSV (default stdout)");
    syn_keys.add(syn, "--n", "n", "rows (default 100)");
    syn_keys.add(syn, "--t", "t", "columns (default 100)");
    syn_keys.add(syn, "--p", "p", "true factor count (default 3)");
    syn_keys.add(syn, "--gamma", "gamma", "residual level");
    syn_keys.add(syn, "--snr", "snr", "signal-noise ratio; sets gamma = p / snr");
    syn_keys.add(syn, "--alpha", "alpha", "residual auto-correlation");
    syn_keys.add(syn, "--beta", "beta", "residual cross-correlation");
    syn_keys.add(syn, "--j", "j", "cross-correlation range in rows");
    syn_keys.add(syn, "--seed", "seed", "RNG seed");

    // scenario
    KeyFlags scn_keys;
    auto* scn = app.add_subcommand("scenario", "generate a level-step event scenario as CSV");
    scn->add_option("--config", config_path, "key = value config file");
    scn->add_option("-o,--output", output, "output CSV (default stdout)");
    scn_keys.add(scn, "--n", "n", "rows (default 118)");
    scn_keys.add(scn, "--t", "t", "columns (default 1000)");
    scn_keys.add(scn, "--base-level", "base_level", "baseline: one value or N comma-separated values");
    scn_keys.add(scn, "--events", "events", "row:start:level;... (rows 0-based, starts 1-based)");
    scn_keys.add(scn, "--snr", "snr", "noise is (wg + ar) / snr (default 1000)");
    scn_keys.add(scn, "--ar-coeff", "ar_coeff", "AR(1) noise coefficient (default 0.5)");
    scn_keys.add(scn, "--coupling", "coupling", "event spread to row k: step * coupling^|k - row| (default 0.5)");
    scn_keys.add(scn, "--seed", "seed", "RNG seed");

    // window
    KeyFlags win_keys;
    auto* win = app.add_subcommand("window", "sliding-window estimates as CSV (end_index, p_hat, phi_hat, d_min)");
    win->add_option("matrix", matrix_path, "N x T matrix CSV")->required();
    win->add_option("--config", config_path, "key = value config file");
    win->add_option("-o,--output", output, "output CSV (default stdout)");
    win->add_option("--seed", seed, "accepted for uniformity; estimation is deterministic");
    win_keys.add(win, "--width", "width", "window width in samples (default 200)");
    win_keys.add(win, "--step", "step", "stride in samples (default 1)");
    add_estimator_flags(win, win_keys);

    // mp-check
    int mp_p = 0;
    int mp_bins = 100;
    std::vector<int> iid_dims;
    auto* mp = app.add_subcommand("mp-check", "JS divergence of a residual spectrum against the Marchenko-Pastur law");
    auto* mp_matrix = mp->add_option("matrix", matrix_path, "N x T matrix CSV");
    auto* mp_iid = mp->add_option("--iid", iid_dims, "generate four-factor check data of size N T instead")
                       ->expected(2);
    mp_matrix->excludes(mp_iid);
    mp->add_option("--p", mp_p, "factors removed before the check (default 0)");
    mp->add_option("--bins", mp_bins, "bin count (default 100)");
    mp->add_option("--seed", seed, "seed for --iid data (default 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*est) {
            EstimatorConfig cfg;
            est_keys.resolve(config_path).apply(cfg);
            const auto data = load(matrix_path);
            const auto r = estimate(data, cfg);
            if (!surface_path.empty()) {
                with_output(surface_path, [&](std::ostream& os) { write_surface_csv(os, r.surface); });
            }
            std::cout << to_json(r, data.rows(), data.cols()).dump() << '\n';
        } else if (*surf) {
            EstimatorConfig cfg;
            surf_keys.resolve(config_path).apply(cfg);
            const auto surface = divergence_surface(load(matrix_path), cfg);
            with_output(output, [&](std::ostream& os) { write_surface_csv(os, surface); });
        } else if (*md) {
            const auto support = model_support(md_phi);
            const BinningPolicy grid{md_bins, md_lo.value_or(0.0), md_hi.value_or(1.1 * support.upper)};
            const ModelDensityParams params{md_phi, md_eps, grid};
            const auto rho = model_density(params);
            with_output(output, [&](std::ostream& os) { rho.write_tsv(os); });
        } else if (*syn) {
            SyntheticConfig cfg;
            syn_keys.resolve(config_path).apply(cfg);
            const auto data = generate_factor_data(cfg);
            with_output(output, [&](std::ostream& os) { write_matrix_csv(os, data.values()); });
        } else if (*scn) {
            ScenarioConfig cfg;
            scn_keys.resolve(config_path).apply(cfg);
            const auto data = generate_scenario(cfg);
            with_output(output, [&](std::ostream& os) { write_matrix_csv(os, data.values()); });
        } else if (*win) {
            WindowConfig cfg;
            win_keys.resolve(config_path).apply(cfg);
            const auto series = sliding_estimates(load(matrix_path), cfg);
            with_output(output, [&](std::ostream& os) { write_window_csv(os, series); });
        } else if (*mp) {
            if (matrix_path.empty() && iid_dims.empty()) {
                throw ConfigError("mp-check needs a matrix CSV or --iid N T");
            }
            const DataMatrix data = iid_dims.empty()
                                        ? load(matrix_path)
                                        : generate_iid_check_data(iid_dims[0], iid_dims[1], seed.value_or(1));
            if (data.rows() > data.cols()) {
                throw DataError("mp-check needs N <= T");
            }
            const double c = static_cast<double>(data.rows()) / static_cast<double>(data.cols());
            const auto spectrum = residual_spectrum(data, mp_p);
            const double b = (1.0 + std::sqrt(c)) * (1.0 + std::sqrt(c));
            const BinningPolicy grid{mp_bins, 0.0, 1.1 * std::max(spectrum.max(), b)};
            const double js = js_divergence(esd(spectrum, grid), mp_density_on_grid(c, 1.0, grid));
            const nlohmann::json out{{"p", mp_p}, {"c", c}, {"js", js}, {"n", data.rows()}, {"t", data.cols()}};
            std::cout << out.dump() << '\n';
        }
    } catch (const ConfigError& e) {
        std::cerr << "specfactor: configuration error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "specfactor: data error: " << e.what() << '\n';
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "specfactor: numerical error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "specfactor: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
