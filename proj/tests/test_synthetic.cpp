#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "specfactor/error.hpp"
#include "specfactor/synthetic.hpp"

using namespace specfactor;

namespace {

// residual-only draw: p = 0, gamma = 1 gives R = U
Eigen::MatrixXd noise(int n, int t, double alpha, double beta, int j, std::uint64_t seed) {
    SyntheticConfig cfg;
    cfg.n = n;
    cfg.t = t;
    cfg.p = 0;
    cfg.gamma = 1.0;
    cfg.alpha = alpha;
    cfg.beta = beta;
    cfg.j = j;
    cfg.seed = seed;
    return generate_factor_data(cfg).values();
}

double variance(const Eigen::MatrixXd& m) {
    const double mean = m.mean();
    return (m.array() - mean).square().sum() / static_cast<double>(m.size());
}

double row_corr(const Eigen::MatrixXd& m, Eigen::Index a, Eigen::Index b) {
    const Eigen::RowVectorXd x = m.row(a).array() - m.row(a).mean();
    const Eigen::RowVectorXd y = m.row(b).array() - m.row(b).mean();
    return x.dot(y) / std::sqrt(x.squaredNorm() * y.squaredNorm());
}

}  // namespace

TEST_SUITE("synthetic") {

TEST_CASE("iid residual has unit variance") {
    const auto u = noise(200, 200, 0.0, 0.0, 0, 1);
    CHECK(variance(u) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("auto-correlation matches alpha") {
    const auto u = noise(20, 2000, 0.5, 0.0, 0, 2);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
        const Eigen::RowVectorXd r = u.row(i).array() - u.row(i).mean();
        sum += r.head(r.size() - 1).dot(r.tail(r.size() - 1)) / r.squaredNorm();
    }
    CHECK(sum / u.rows() == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("variance normalization across correlation settings (interior rows)") {
    struct Setting {
        double alpha, beta;
        int j;
    };
    for (const auto& s : {Setting{0, 0, 0}, Setting{0.5, 0, 0}, Setting{0, 0.05, 20}, Setting{0.5, 0.05, 20}}) {
        CAPTURE(s.alpha);
        CAPTURE(s.beta);
        const auto u = noise(200, 400, s.alpha, s.beta, s.j, 3);
        const auto interior = u.middleRows(s.j, 200 - 2 * s.j);
        CHECK(variance(interior) == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("cross-correlation is positive within J and vanishes beyond") {
    const int j = 10;
    const auto u = noise(100, 4000, 0.0, 0.05, j, 4);
    double near = 0.0, far = 0.0;
    int count = 0;
    for (Eigen::Index i = 20; i < 80; ++i, ++count) {
        near += row_corr(u, i, i + 1);
        far += row_corr(u, i, i + 2 * j + 5);
    }
    near /= count;
    far /= count;
    CHECK(near > 0.02);
    CHECK(std::abs(far) < 0.01);
    CHECK(near > 5 * std::abs(far));
}

TEST_CASE("gamma = 0 gives an exact rank-p matrix") {
    SyntheticConfig cfg;
    cfg.gamma = 0.0;
    cfg.p = 3;
    const auto r = generate_factor_data(cfg).values();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
    CHECK(svd.singularValues()(3) < 1e-10 * svd.singularValues()(0));
}

TEST_CASE("signal-noise ratio identity") {
    SyntheticConfig cfg;
    cfg.n = cfg.t = 200;
    cfg.p = 3;
    cfg.gamma = SyntheticConfig::gamma_for_snr(3, 10.0);
    cfg.seed = 5;
    const auto r = generate_factor_data(cfg).values();
    SyntheticConfig factors_only = cfg;
    factors_only.gamma = 0.0;
    const auto f = generate_factor_data(factors_only).values();  // same stream, so same factor part
    const Eigen::MatrixXd resid = r - f;
    CHECK(variance(f) / variance(resid) == doctest::Approx(3.0 / cfg.gamma).epsilon(0.1));
}

TEST_CASE("seed determinism") {
    SyntheticConfig cfg;
    cfg.alpha = 0.5;
    cfg.beta = 0.05;
    cfg.j = 10;
    CHECK(generate_factor_data(cfg).values() == generate_factor_data(cfg).values());
    SyntheticConfig other = cfg;
    other.seed = 2;
    CHECK(generate_factor_data(cfg).values() != generate_factor_data(other).values());
    CHECK(generate_iid_check_data(20, 30, 4).values() == generate_iid_check_data(20, 30, 4).values());
    ScenarioConfig sc;
    sc.events = {{3, 500, 80}};
    CHECK(generate_scenario(sc).values() == generate_scenario(sc).values());
}

TEST_CASE("config validation") {
    SyntheticConfig cfg;
    cfg.alpha = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.beta = -0.1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.j = cfg.n + 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.p = 100;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    ScenarioConfig sc;
    sc.events = {{118, 10, 1.0}};
    CHECK_THROWS_AS(sc.validate(), ConfigError);
    sc.events = {{0, 0, 1.0}};
    CHECK_THROWS_AS(sc.validate(), ConfigError);
    sc.events = {{0, 1001, 1.0}};
    CHECK_THROWS_AS(sc.validate(), ConfigError);
    sc.events.clear();
    sc.base_level = {1.0, 2.0};
    CHECK_THROWS_AS(sc.validate(), ConfigError);
    sc = {};
    sc.coupling = 1.0;
    CHECK_THROWS_AS(sc.validate(), ConfigError);
}

TEST_CASE("iid check data has four weak factors") {
    const auto r = generate_iid_check_data(100, 150, 6).values();
    CHECK(r.rows() == 100);
    CHECK(r.cols() == 150);
    CHECK(variance(r) == doctest::Approx(1.0 + 4 * 0.01).epsilon(0.05));
}

TEST_CASE("scenario levels and noise") {
    ScenarioConfig sc;
    sc.n = 10;
    sc.t = 400;
    sc.coupling = 0.0;
    sc.events = {{4, 201, 80.0}};
    const auto r = generate_scenario(sc).values();
    CHECK(r.row(4).head(200).mean() == doctest::Approx(20.0).epsilon(1e-3));
    CHECK(r.row(4).tail(200).mean() == doctest::Approx(80.0).epsilon(1e-3));
    CHECK(r.row(5).tail(200).mean() == doctest::Approx(20.0).epsilon(1e-3));
    // noise scale (wg + ar) / snr, variance (1 + 1 / (1 - 0.25)) / snr^2
    const Eigen::MatrixXd centred = r.leftCols(200).array() - 20.0;
    const double expected = (1.0 + 1.0 / 0.75) / (sc.snr * sc.snr);
    CHECK(variance(centred) == doctest::Approx(expected).epsilon(0.1));
}

TEST_CASE("scenario coupling spreads a step geometrically") {
    ScenarioConfig sc;
    sc.n = 10;
    sc.t = 400;
    sc.coupling = 0.5;
    sc.snr = 1e9;
    sc.events = {{4, 201, 84.0}};
    const auto r = generate_scenario(sc).values();
    for (int k = 0; k < 10; ++k) {
        const double step = r.row(k).tail(200).mean() - r.row(k).head(200).mean();
        CHECK(step == doctest::Approx(64.0 * std::pow(0.5, std::abs(k - 4))).epsilon(1e-6));
    }
}

TEST_CASE("wishart product sampler") {
    const auto s = sample_wishart_product(1000, 1.0, 3);
    double mean = 0.0;
    for (double x : s.values()) mean += x;
    mean /= static_cast<double>(s.size());
    CHECK(mean == doctest::Approx(1.0).epsilon(0.03));
    CHECK(s.max() >= 6.2);
    CHECK(s.max() <= 7.0);
    CHECK(s.min() >= 0.0);
    CHECK_THROWS_AS(sample_wishart_product(100, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(sample_wishart_product(100, 1.5, 1), ConfigError);
}

}
