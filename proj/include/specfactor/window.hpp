#pragma once

#include <string>
#include <vector>

#include "specfactor/estimator.hpp"

namespace specfactor {

struct WindowConfig {
    int width = 200;
    int step = 1;
    EstimatorConfig estimator{};

    /// Requires N < width <= T and step >= 1.
    void validate(Eigen::Index n, Eigen::Index t) const;
    /// floor((T - width) / step) + 1
    std::size_t window_count(Eigen::Index t) const;
};

struct WindowEntry {
    int end_index = 0;  // 1-based sample index of the window's last column
    int p_hat = -1;
    double phi_hat = 0.0;
    double d_min = 0.0;
    /// Empty for a successful window; otherwise the failure message.
    std::string error;

    bool ok() const noexcept { return error.empty(); }
};

struct WindowSeries {
    std::vector<WindowEntry> entries;  // ascending end_index
};

/// Estimates each window [t - width + 1, t], t = width, width + step, ... independently.
/// Windows whose estimate fails on data or numerical grounds become gap entries.
WindowSeries sliding_estimates(const DataMatrix& data, const WindowConfig& cfg);
WindowSeries sliding_estimates(const DataMatrix& data, const WindowConfig& cfg, ModelCache& cache);

/// Same as sliding_estimates but evaluates windows in the given order (a permutation of
/// 0 .. window_count - 1). Exposed so that order independence can be checked.
WindowSeries sliding_estimates_ordered(const DataMatrix& data, const WindowConfig& cfg,
                                       const std::vector<std::size_t>& order, ModelCache& cache);

}  // namespace specfactor
