#include "specfactor/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "specfactor/error.hpp"
#include "specfactor/free_model.hpp"
#include "specfactor/parallel.hpp"

namespace specfactor {

namespace {

constexpr double kSupportPad = 1.1;
constexpr double kRefineStep = 0.001;
constexpr double kRefineHalfWidth = 0.02;

// Grid values are compared after rounding so that 0.1 + 0.2 style drift does not
// create near-duplicate surface points.
double snap(double phi) { return std::round(phi * 1e9) / 1e9; }

// Eigenvalues inside the model support are mapped to the probability coordinate
// u = F(lambda) * B (piecewise linear between quantiles) and shared between the two
// nearest cell centres. Those outside go whole into the under- or overflow cell.
SpectralDensity linear_cell_mass(const EigenSpectrum& spectrum, const std::vector<double>& q,
                                 const std::vector<double>& edges) {
    const int cells = static_cast<int>(q.size()) - 1;
    const std::size_t offset = edges.front() < q.front() ? 1 : 0;
    std::vector<double> mass(edges.size() - 1, 0.0);
    const double unit = 1.0 / static_cast<double>(spectrum.size());
    for (double v : spectrum.values()) {
        if (v < q.front()) {
            mass.front() += unit;
            continue;
        }
        if (v > q.back()) {
            if (v > edges.back()) {
                throw DataError("eigenvalue beyond the comparison grid");
            }
            mass.back() += unit;
            continue;
        }
        const auto it = std::upper_bound(q.begin(), q.end(), v);
        const int k = std::min(cells - 1, static_cast<int>(it - q.begin()) - 1);
        const double u = k + (v - q[k]) / (q[k + 1] - q[k]);
        const double x = std::clamp(u - 0.5, 0.0, static_cast<double>(cells - 1));
        const int i = std::min(cells - 1, static_cast<int>(x));
        const double f = x - i;
        mass[offset + i] += unit * (1.0 - f);
        if (f > 0.0) {
            mass[offset + i + 1] += unit * f;
        }
    }
    double total = 0.0;
    for (double m : mass) {
        total += m;
    }
    for (double& m : mass) {
        m /= total;
    }
    return {edges, std::move(mass)};
}

}  // namespace

const char* to_string(GridMode mode) {
    return mode == GridMode::equiprobable ? "equiprobable" : "shared_support";
}

GridMode grid_mode_from_string(const std::string& name) {
    if (name == "equiprobable") {
        return GridMode::equiprobable;
    }
    if (name == "shared_support") {
        return GridMode::shared_support;
    }
    throw ConfigError("unknown grid mode '" + name + "' (expected equiprobable or shared_support)");
}

void EstimatorConfig::validate() const {
    binning.validate();
    for (std::size_t i = 0; i < phi_grid.size(); ++i) {
        const double phi = phi_grid[i];
        if (!(phi > 0.0 && phi <= 1.0)) {
            throw ConfigError("phi grid values must lie in (0, 1]");
        }
        if (i > 0 && !(phi > phi_grid[i - 1])) {
            throw ConfigError("phi grid must be strictly ascending");
        }
    }
}

std::vector<double> EstimatorConfig::default_phi_grid() {
    std::vector<double> grid;
    for (int k = 1; k <= 100; ++k) {
        grid.push_back(k / 100.0);
    }
    return grid;
}

std::vector<double> EstimatorConfig::resolved_phi_grid() const {
    return phi_grid.empty() ? default_phi_grid() : phi_grid;
}

int EstimatorConfig::resolved_p_max(Eigen::Index n, Eigen::Index t) const {
    const auto limit = static_cast<int>(std::min(n, t));
    if (p_max >= 0) {
        if (p_max >= limit) {
            std::ostringstream msg;
            msg << "p_max = " << p_max << " must be below min(N, T) = " << limit;
            throw ConfigError(msg.str());
        }
        return p_max;
    }
    return std::min({20, static_cast<int>(n / 5), limit - 1});
}

std::vector<double> model_quantiles(double phi, int bins) {
    if (bins < 1) {
        throw ConfigError("quantile count must be positive");
    }
    const ModelCdf cdf(phi);
    std::vector<double> q(bins + 1);
    for (int k = 0; k <= bins; ++k) {
        q[k] = cdf.quantile(static_cast<double>(k) / bins);
    }
    for (int k = 1; k <= bins; ++k) {
        if (!(q[k] > q[k - 1])) {
            throw NumericalError("model quantiles are not strictly increasing");
        }
    }
    return q;
}

std::shared_ptr<const std::vector<double>> ModelCache::quantiles(double phi, int bins) {
    const auto key = std::make_pair(snap(phi), bins);
    {
        std::lock_guard lock(mutex_);
        if (auto it = quantiles_.find(key); it != quantiles_.end()) {
            return it->second;
        }
    }
    // computed outside the lock; a concurrent duplicate is harmless
    auto value = std::make_shared<const std::vector<double>>(model_quantiles(phi, bins));
    std::lock_guard lock(mutex_);
    return quantiles_.emplace(key, std::move(value)).first->second;
}

std::shared_ptr<const SpectralDensity> ModelCache::density(double phi, const std::vector<double>& edges,
                                                           double epsilon) {
    auto key = std::make_pair(snap(phi), edges);
    {
        std::lock_guard lock(mutex_);
        if (auto it = densities_.find(key); it != densities_.end()) {
            return it->second;
        }
    }
    auto value = std::make_shared<const SpectralDensity>(model_density(phi, edges, epsilon));
    std::lock_guard lock(mutex_);
    return densities_.emplace(std::move(key), std::move(value)).first->second;
}

std::size_t ModelCache::size() const {
    std::lock_guard lock(mutex_);
    return quantiles_.size() + densities_.size();
}

Comparison build_comparison(const EigenSpectrum& spectrum, double phi, const EstimatorConfig& cfg,
                            ModelCache& cache) {
    if (spectrum.empty()) {
        throw DataError("empty spectrum");
    }
    const auto support = model_support(phi);
    const double hi = kSupportPad * std::max(spectrum.max(), support.upper);

    if (cfg.grid == GridMode::shared_support) {
        const BinningPolicy policy{cfg.binning.bin_count, 0.0, hi};
        const auto edges = policy.edges();
        const auto model = cache.density(phi, edges, cfg.epsilon);
        return {esd(spectrum, edges), *model};
    }

    const auto q = cache.quantiles(phi, cfg.binning.bin_count);
    const int cells = cfg.binning.bin_count;
    std::vector<double> edges;
    std::vector<double> mass;
    edges.reserve(q->size() + 2);
    mass.reserve(q->size() + 1);
    if (support.lower > 0.0) {
        edges.push_back(0.0);
        mass.push_back(0.0);
    }
    edges.insert(edges.end(), q->begin(), q->end());
    mass.insert(mass.end(), cells, 1.0 / cells);
    edges.push_back(hi);
    mass.push_back(0.0);
    if (!cfg.linear_assignment) {
        return {esd(spectrum, edges), SpectralDensity(std::move(edges), std::move(mass))};
    }
    return {linear_cell_mass(spectrum, *q, edges), SpectralDensity(std::move(edges), std::move(mass))};
}

double cell_divergence(const EigenSpectrum& spectrum, double phi, const EstimatorConfig& cfg, ModelCache& cache) {
    const auto c = build_comparison(spectrum, phi, cfg, cache);
    return js_divergence(c.empirical, c.model);
}

namespace {

std::vector<SurfacePoint> evaluate_cells(const std::vector<EigenSpectrum>& spectra,
                                         const std::vector<std::pair<int, double>>& cells,
                                         const EstimatorConfig& cfg, ModelCache& cache) {
    std::vector<SurfacePoint> out(cells.size());
    parallel_for(cells.size(), cfg.threads, [&](std::size_t i) {
        const auto [p, phi] = cells[i];
        out[i] = {p, phi, cell_divergence(spectra[p], phi, cfg, cache)};
    });
    return out;
}

std::vector<EigenSpectrum> ladder_spectra(const DataMatrix& data, int p_max, unsigned threads) {
    const ResidualLadder ladder(data);
    std::vector<std::optional<EigenSpectrum>> slots(p_max + 1);
    parallel_for(slots.size(), threads, [&](std::size_t p) { slots[p] = ladder.spectrum(static_cast<int>(p)); });
    std::vector<EigenSpectrum> spectra;
    spectra.reserve(slots.size());
    for (auto& s : slots) {
        spectra.push_back(std::move(*s));
    }
    return spectra;
}

void check_dimensions(const DataMatrix& data) {
    if (data.rows() > data.cols()) {
        std::ostringstream msg;
        msg << "estimation needs N <= T, got N = " << data.rows() << ", T = " << data.cols()
            << "; transpose the input if rows are samples";
        throw DataError(msg.str());
    }
}

std::vector<SurfacePoint> full_surface(const DataMatrix& data, const EstimatorConfig& cfg, ModelCache& cache) {
    cfg.validate();
    check_dimensions(data);
    const int p_max = cfg.resolved_p_max(data.rows(), data.cols());
    const auto grid = cfg.resolved_phi_grid();
    const auto spectra = ladder_spectra(data, p_max, cfg.threads);

    std::vector<std::pair<int, double>> cells;
    for (int p = 0; p <= p_max; ++p) {
        for (double phi : grid) {
            cells.emplace_back(p, phi);
        }
    }
    auto surface = evaluate_cells(spectra, cells, cfg, cache);
    if (!cfg.refine) {
        return surface;
    }

    // refine around each p's coarse optimum
    std::vector<std::pair<int, double>> extra;
    for (int p = 0; p <= p_max; ++p) {
        const auto first = surface.begin() + static_cast<std::ptrdiff_t>(p * grid.size());
        const auto best = std::min_element(first, first + static_cast<std::ptrdiff_t>(grid.size()),
                                           [](const SurfacePoint& x, const SurfacePoint& y) {
                                               return x.divergence < y.divergence;
                                           });
        const int steps = static_cast<int>(std::lround(kRefineHalfWidth / kRefineStep));
        for (int k = -steps; k <= steps; ++k) {
            const double phi = snap(best->phi + k * kRefineStep);
            if (!(phi > 0.0 && phi <= 1.0)) {
                continue;
            }
            const bool known = std::any_of(grid.begin(), grid.end(), [&](double g) { return snap(g) == phi; });
            if (!known) {
                extra.emplace_back(p, phi);
            }
        }
    }
    auto refined = evaluate_cells(spectra, extra, cfg, cache);
    surface.insert(surface.end(), refined.begin(), refined.end());
    std::sort(surface.begin(), surface.end(), [](const SurfacePoint& x, const SurfacePoint& y) {
        return x.p != y.p ? x.p < y.p : x.phi < y.phi;
    });
    return surface;
}

}  // namespace

std::vector<SurfacePoint> divergence_surface(const DataMatrix& data, const EstimatorConfig& cfg, ModelCache& cache) {
    return full_surface(data, cfg, cache);
}

std::vector<SurfacePoint> divergence_surface(const DataMatrix& data, const EstimatorConfig& cfg) {
    ModelCache cache;
    return full_surface(data, cfg, cache);
}

EstimationResult estimate(const DataMatrix& data, const EstimatorConfig& cfg, ModelCache& cache) {
    EstimationResult result;
    result.surface = full_surface(data, cfg, cache);
    if (result.surface.empty()) {
        throw NumericalError("empty divergence surface");
    }
    // surface is ordered by (p, phi), so strict comparisons keep the smallest p, then phi
    const SurfacePoint* best = nullptr;
    for (const auto& s : result.surface) {
        auto [it, inserted] = result.per_p_best.try_emplace(s.p, PerPBest{s.phi, s.divergence});
        if (!inserted && s.divergence < it->second.divergence) {
            it->second = {s.phi, s.divergence};
        }
        if (best == nullptr || s.divergence < best->divergence) {
            best = &s;
        }
    }
    result.p_hat = best->p;
    result.phi_hat = best->phi;
    result.d_min = best->divergence;
    return result;
}

EstimationResult estimate(const DataMatrix& data, const EstimatorConfig& cfg) {
    ModelCache cache;
    return estimate(data, cfg, cache);
}

}  // namespace specfactor
