#include "specfactor/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "specfactor/error.hpp"

namespace specfactor {

namespace {

class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double operator()() { return dist_(engine_); }

    Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols, double sd = 1.0) {
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                m(i, j) = sd * dist_(engine_);
            }
        }
        return m;
    }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> dist_{0.0, 1.0};
};

// v_i + beta * sum of v_h over rows h != i with |h - i| <= j.
Eigen::VectorXd cross_mix(const Eigen::VectorXd& v, double beta, int j) {
    if (beta == 0.0 || j == 0) {
        return v;
    }
    const Eigen::Index n = v.size();
    // prefix sums give each window sum in O(1)
    Eigen::VectorXd prefix(n + 1);
    prefix(0) = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        prefix(i + 1) = prefix(i) + v(i);
    }
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, i - j);
        const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + j);
        const double neighbours = prefix(hi + 1) - prefix(lo) - v(i);
        out(i) = v(i) + beta * neighbours;
    }
    return out;
}

}  // namespace

void SyntheticConfig::validate() const {
    if (n < 2 || t < 2) {
        throw ConfigError("synthetic data needs N >= 2 and T >= 2");
    }
    if (p < 0 || p >= std::min(n, t)) {
        throw ConfigError("synthetic factor count must satisfy 0 <= p < min(N, T)");
    }
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw ConfigError("gamma must be nonnegative");
    }
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw ConfigError("alpha must lie in [0, 1)");
    }
    if (!(beta >= 0.0 && beta < 1.0)) {
        throw ConfigError("beta must lie in [0, 1)");
    }
    if (j < 0 || j > n) {
        throw ConfigError("J must lie in [0, N]");
    }
}

void ScenarioConfig::validate() const {
    if (n < 2 || t < 2) {
        throw ConfigError("scenario needs N >= 2 and T >= 2");
    }
    if (base_level.size() != 1 && base_level.size() != static_cast<std::size_t>(n)) {
        throw ConfigError("base_level must have 1 or N entries");
    }
    if (!(snr > 0.0)) {
        throw ConfigError("snr must be positive");
    }
    if (!(std::abs(ar_coeff) < 1.0)) {
        throw ConfigError("ar_coeff must lie in (-1, 1)");
    }
    if (!(coupling >= 0.0 && coupling < 1.0)) {
        throw ConfigError("coupling must lie in [0, 1)");
    }
    for (const auto& ev : events) {
        if (ev.row < 0 || ev.row >= n) {
            throw ConfigError("event row " + std::to_string(ev.row) + " is out of range");
        }
        if (ev.start < 1 || ev.start > t) {
            throw ConfigError("event start " + std::to_string(ev.start) + " must lie in [1, T]");
        }
    }
}

DataMatrix generate_factor_data(const SyntheticConfig& cfg) {
    cfg.validate();
    NormalStream rng(cfg.seed);
    const Eigen::MatrixXd loadings = rng.matrix(cfg.n, cfg.p);
    const Eigen::MatrixXd factors = rng.matrix(cfg.p, cfg.t);

    // e_{.,0} = s_{.,0} / sqrt(1 - alpha^2) is an exact draw from the stationary law,
    // cross-correlation included.
    const double a = cfg.alpha;
    Eigen::VectorXd v(cfg.n);
    for (int i = 0; i < cfg.n; ++i) {
        v(i) = rng();
    }
    Eigen::VectorXd e = cross_mix(v, cfg.beta, cfg.j) / std::sqrt(1.0 - a * a);

    Eigen::MatrixXd u(cfg.n, cfg.t);
    for (int t = 0; t < cfg.t; ++t) {
        for (int i = 0; i < cfg.n; ++i) {
            v(i) = rng();
        }
        e = a * e + cross_mix(v, cfg.beta, cfg.j);
        u.col(t) = e;
    }
    u *= std::sqrt((1.0 - a * a) / (1.0 + 2.0 * cfg.j * cfg.beta * cfg.beta));

    Eigen::MatrixXd r = std::sqrt(cfg.gamma) * u;
    if (cfg.p > 0) {
        r.noalias() += loadings * factors;
    }
    return DataMatrix(std::move(r));
}

DataMatrix generate_iid_check_data(int n, int t, std::uint64_t seed) {
    if (n < 2 || t < 2) {
        throw ConfigError("iid check data needs N >= 2 and T >= 2");
    }
    constexpr int kFactors = 4;
    NormalStream rng(seed);
    const Eigen::MatrixXd loadings = rng.matrix(n, kFactors);
    const Eigen::MatrixXd factors = rng.matrix(kFactors, t, 0.1);
    Eigen::MatrixXd r = rng.matrix(n, t);
    r.noalias() += loadings * factors;
    return DataMatrix(std::move(r));
}

DataMatrix generate_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    NormalStream rng(cfg.seed);
    Eigen::MatrixXd r(cfg.n, cfg.t);
    for (int i = 0; i < cfg.n; ++i) {
        r.row(i).setConstant(cfg.base_level.size() == 1 ? cfg.base_level[0] : cfg.base_level[i]);
    }
    auto events = cfg.events;
    std::stable_sort(events.begin(), events.end(),
                     [](const StepEvent& x, const StepEvent& y) { return x.start < y.start; });
    for (const auto& ev : events) {
        const Eigen::Index from = ev.start - 1;
        const Eigen::Index len = cfg.t - from;
        const double step = ev.level - r(ev.row, from);
        for (int k = 0; k < cfg.n; ++k) {
            const int dist = std::abs(k - ev.row);
            const double w = dist == 0 ? 1.0 : std::pow(cfg.coupling, dist);
            if (w != 0.0) {
                r.row(k).segment(from, len).array() += w * step;
            }
        }
    }

    const double phi = cfg.ar_coeff;
    const double scale = 1.0 / cfg.snr;
    for (int i = 0; i < cfg.n; ++i) {
        double ar = rng() / std::sqrt(1.0 - phi * phi);
        for (int t = 0; t < cfg.t; ++t) {
            if (t > 0) {
                ar = phi * ar + rng();
            }
            const double wg = rng();
            r(i, t) += scale * (wg + ar);
        }
    }
    return DataMatrix(std::move(r));
}

EigenSpectrum sample_wishart_product(int n_dim, double phi, std::uint64_t seed) {
    if (!(phi > 0.0 && phi <= 1.0)) {
        throw ConfigError("phi must lie in (0, 1]");
    }
    if (n_dim < 2) {
        throw ConfigError("n_dim must be at least 2");
    }
    const auto cols = static_cast<Eigen::Index>(std::lround(n_dim / phi));
    NormalStream rng(seed);
    const Eigen::MatrixXd g0 = rng.matrix(n_dim, cols);
    const Eigen::MatrixXd g1 = rng.matrix(n_dim, cols);
    Eigen::MatrixXd s0 = Eigen::MatrixXd::Zero(n_dim, n_dim);
    Eigen::MatrixXd s1 = Eigen::MatrixXd::Zero(n_dim, n_dim);
    s0.selfadjointView<Eigen::Lower>().rankUpdate(g0, 1.0 / static_cast<double>(cols));
    s1.selfadjointView<Eigen::Lower>().rankUpdate(g1, 1.0 / static_cast<double>(cols));
    s0.triangularView<Eigen::StrictlyUpper>() = s0.transpose();
    s1.triangularView<Eigen::StrictlyUpper>() = s1.transpose();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> root(s1);
    if (root.info() != Eigen::Success) {
        throw NumericalError("eigensolver failed while forming the Wishart square root");
    }
    const Eigen::MatrixXd half = root.operatorSqrt();
    return symmetric_spectrum(half * s0 * half);
}

}  // namespace specfactor
