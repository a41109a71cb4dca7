#include "specfactor/window.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "specfactor/error.hpp"
#include "specfactor/parallel.hpp"

namespace specfactor {

void WindowConfig::validate(Eigen::Index n, Eigen::Index t) const {
    if (step < 1) {
        throw ConfigError("window step must be at least 1");
    }
    if (width > t) {
        std::ostringstream msg;
        msg << "window width " << width << " exceeds T = " << t;
        throw ConfigError(msg.str());
    }
    if (width <= n) {
        std::ostringstream msg;
        msg << "window width " << width << " must exceed N = " << n;
        throw ConfigError(msg.str());
    }
    estimator.validate();
}

std::size_t WindowConfig::window_count(Eigen::Index t) const {
    return static_cast<std::size_t>((t - width) / step) + 1;
}

WindowSeries sliding_estimates_ordered(const DataMatrix& data, const WindowConfig& cfg,
                                       const std::vector<std::size_t>& order, ModelCache& cache) {
    cfg.validate(data.rows(), data.cols());
    const std::size_t count = cfg.window_count(data.cols());
    std::vector<std::size_t> check = order;
    std::sort(check.begin(), check.end());
    for (std::size_t i = 0; i < check.size(); ++i) {
        if (check.size() != count || check[i] != i) {
            throw ConfigError("window order must be a permutation of all windows");
        }
    }

    // parallelism lives at the window level; each estimate runs single-threaded
    EstimatorConfig inner = cfg.estimator;
    const unsigned threads = cfg.estimator.threads;
    inner.threads = 1;

    WindowSeries series;
    series.entries.resize(count);
    parallel_for(count, threads, [&](std::size_t k) {
        const std::size_t w = order[k];
        const Eigen::Index first = static_cast<Eigen::Index>(w) * cfg.step;
        WindowEntry& entry = series.entries[w];
        entry.end_index = static_cast<int>(first + cfg.width);
        try {
            const auto r = estimate(data.window(first, cfg.width), inner, cache);
            entry.p_hat = r.p_hat;
            entry.phi_hat = r.phi_hat;
            entry.d_min = r.d_min;
        } catch (const DataError& e) {
            entry.error = std::string("data: ") + e.what();
        } catch (const NumericalError& e) {
            entry.error = std::string("numerical: ") + e.what();
        }
    });
    return series;
}

WindowSeries sliding_estimates(const DataMatrix& data, const WindowConfig& cfg, ModelCache& cache) {
    cfg.validate(data.rows(), data.cols());
    std::vector<std::size_t> order(cfg.window_count(data.cols()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    return sliding_estimates_ordered(data, cfg, order, cache);
}

WindowSeries sliding_estimates(const DataMatrix& data, const WindowConfig& cfg) {
    ModelCache cache;
    return sliding_estimates(data, cfg, cache);
}

}  // namespace specfactor
