#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specfactor/residual.hpp"
#include "specfactor/spectral.hpp"

namespace specfactor {

/// How the residual ESD and the model density are put on a common grid.
enum class GridMode {
    /// Cells of equal model probability between the support edges, plus empty
    /// under- and overflow cells reaching 0 and 1.1 x max(largest eigenvalue, upper edge).
    equiprobable,
    /// bin_count equal-width bins over [0, 1.1 x max(largest eigenvalue, upper edge)].
    shared_support,
};

const char* to_string(GridMode mode);
GridMode grid_mode_from_string(const std::string& name);

struct EstimatorConfig {
    /// Negative selects the default min(20, floor(N / 5)), capped below min(N, T).
    int p_max = -1;
    /// Empty selects 0.01, 0.02, ..., 1.00.
    std::vector<double> phi_grid;
    /// Second pass at step 0.001 within +-0.02 of each p's coarse optimum.
    bool refine = false;
    /// Only bin_count is used; the support is derived per comparison.
    BinningPolicy binning{50, 0.0, 1.0};
    GridMode grid = GridMode::equiprobable;
    /// Equiprobable grid only: split each in-support eigenvalue between the two nearest
    /// cell centres (in model-probability coordinates) instead of counting it in one cell.
    bool linear_assignment = true;
    /// Inversion offset for shared-support model densities; non-positive selects the default.
    double epsilon = 0.0;
    /// Worker cap; 0 defers to SPECFACTOR_THREADS or the hardware count.
    unsigned threads = 0;

    void validate() const;
    int resolved_p_max(Eigen::Index n, Eigen::Index t) const;
    std::vector<double> resolved_phi_grid() const;
    static std::vector<double> default_phi_grid();
};

struct SurfacePoint {
    int p;
    double phi;
    double divergence;
};

struct PerPBest {
    double phi;
    double divergence;
};

struct EstimationResult {
    int p_hat = 0;
    double phi_hat = 0.0;
    double d_min = 0.0;
    std::vector<SurfacePoint> surface;  // ordered by (p, phi)
    std::map<int, PerPBest> per_p_best;
};

/// Thread-safe cache of model-side grid data, shared across p values and windows.
class ModelCache {
public:
    /// Model quantiles q_0 = lower edge, ..., q_B = upper edge splitting the law into
    /// B cells of equal probability.
    std::shared_ptr<const std::vector<double>> quantiles(double phi, int bins);
    /// Model density on explicit edges.
    std::shared_ptr<const SpectralDensity> density(double phi, const std::vector<double>& edges, double epsilon);

    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<std::pair<double, int>, std::shared_ptr<const std::vector<double>>> quantiles_;
    std::map<std::pair<double, std::vector<double>>, std::shared_ptr<const SpectralDensity>> densities_;
};

/// Model cell quantiles computed from a fine cumulative integral of the model density.
std::vector<double> model_quantiles(double phi, int bins);

/// The common grid for one (spectrum, phi) comparison and the model density on it.
struct Comparison {
    SpectralDensity empirical;
    SpectralDensity model;
};

Comparison build_comparison(const EigenSpectrum& spectrum, double phi, const EstimatorConfig& cfg,
                            ModelCache& cache);

/// JS divergence of one (spectrum, phi) cell.
double cell_divergence(const EigenSpectrum& spectrum, double phi, const EstimatorConfig& cfg, ModelCache& cache);

EstimationResult estimate(const DataMatrix& data, const EstimatorConfig& cfg);
EstimationResult estimate(const DataMatrix& data, const EstimatorConfig& cfg, ModelCache& cache);

std::vector<SurfacePoint> divergence_surface(const DataMatrix& data, const EstimatorConfig& cfg);
std::vector<SurfacePoint> divergence_surface(const DataMatrix& data, const EstimatorConfig& cfg,
                                             ModelCache& cache);

}  // namespace specfactor
