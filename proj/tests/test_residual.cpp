#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "specfactor/error.hpp"
#include "specfactor/residual.hpp"

using namespace specfactor;

TEST_SUITE("residual") {

TEST_CASE("data matrix validation") {
    CHECK_THROWS_AS(DataMatrix(Eigen::MatrixXd::Ones(1, 5)), DataError);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(3, 3);
    bad(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(DataMatrix{bad}, DataError);
    const DataMatrix ok(oracle::gaussian(4, 10, 1));
    CHECK(ok.window(2, 5).cols() == 5);
    CHECK_THROWS_AS(ok.window(8, 5), ConfigError);
}

TEST_CASE("factor fit p = 0 and exact low rank") {
    const DataMatrix r(oracle::gaussian(6, 9, 2));
    const auto fit0 = factor_fit(r, 0);
    CHECK(fit0.loadings.cols() == 0);
    CHECK(fit0.factors.rows() == 0);
    CHECK(residual(r, 0).values == r.values());

    const Eigen::MatrixXd rank2 = oracle::gaussian(30, 2, 3) * oracle::gaussian(2, 40, 4);
    const DataMatrix low(rank2);
    const auto fit = factor_fit(low, 2);
    CHECK((rank2 - fit.loadings * fit.factors).norm() < 1e-8 * rank2.norm());
    CHECK(residual(low, 2).values.norm() < 1e-8 * rank2.norm());
}

TEST_CASE("truncated reconstruction error equals the discarded singular values") {
    const Eigen::MatrixXd x = oracle::gaussian(50, 80, 5);
    const Eigen::JacobiSVD<Eigen::MatrixXd> full(x);  // independent full decomposition
    const auto& s = full.singularValues();
    const double tail = s.tail(s.size() - 3).squaredNorm();
    const auto u = residual(DataMatrix(x), 3);
    CHECK(u.values.squaredNorm() == doctest::Approx(tail).epsilon(1e-8));
}

TEST_CASE("factor orthonormality and residual orthogonality") {
    const Eigen::MatrixXd x = oracle::gaussian(40, 60, 6);
    const ResidualLadder ladder{DataMatrix(x)};
    for (int p = 1; p <= 8; ++p) {
        const auto fit = ladder.factor_fit(p);
        CHECK((fit.factors * fit.factors.transpose() - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff() < 1e-10);
        const Eigen::MatrixXd recon = fit.loadings * fit.factors;
        const auto u = ladder.residual(p);
        CHECK(std::abs((u.values.array() * recon.array()).sum()) < 1e-8 * x.squaredNorm());
    }
}

TEST_CASE("Eckart-Young monotonicity") {
    for (std::uint32_t seed = 10; seed < 15; ++seed) {
        const ResidualLadder ladder{DataMatrix(oracle::gaussian(25, 35, seed))};
        double previous = std::numeric_limits<double>::infinity();
        for (int p = 0; p <= 10; ++p) {
            const double norm = ladder.residual(p).values.norm();
            CHECK(norm <= previous + 1e-12);
            previous = norm;
        }
    }
}

TEST_CASE("p range") {
    const DataMatrix r(oracle::gaussian(5, 8, 7));
    CHECK_THROWS_AS(factor_fit(r, 5), ConfigError);
    CHECK_THROWS_AS(residual(r, -1), ConfigError);
    CHECK_NOTHROW(residual(r, 4));
}

TEST_CASE("standardize rows") {
    ResidualMatrix u;
    u.values = Eigen::MatrixXd(1, 3);
    u.values << 1, 2, 3;
    const auto s = standardize_rows(u);
    const double hand = std::sqrt(1.5);  // (3 - 2) / sqrt(2/3)
    CHECK(s.values(0, 0) == doctest::Approx(-hand).epsilon(1e-12));
    CHECK(s.values(0, 1) == doctest::Approx(0.0));
    CHECK(s.values(0, 2) == doctest::Approx(hand).epsilon(1e-12));
    CHECK(hand == doctest::Approx(1.2247).epsilon(1e-4));

    ResidualMatrix g{oracle::gaussian(20, 50, 8) * 3.0 + Eigen::MatrixXd::Constant(20, 50, 4.0), 0, 1.0};
    const auto once = standardize_rows(g);
    for (Eigen::Index i = 0; i < 20; ++i) {
        CHECK(std::abs(once.values.row(i).mean()) < 1e-10);
        CHECK(std::abs(once.values.row(i).squaredNorm() / 50.0 - 1.0) < 1e-10);
    }
    const auto twice = standardize_rows(once);
    CHECK((twice.values - once.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero-variance row names the row") {
    ResidualMatrix u{oracle::gaussian(4, 10, 9), 2, 1.0};
    u.values.row(2).setConstant(5.0);
    try {
        standardize_rows(u);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
}

TEST_CASE("residual covariance") {
    // rows orthogonal with norm sqrt(T): rows of a scaled Hadamard-like matrix
    Eigen::MatrixXd h(2, 4);
    h << 1, 1, 1, 1, 1, -1, 1, -1;
    const auto cov = residual_covariance(ResidualMatrix{h, 0, 1.0});
    CHECK((cov - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);

    ResidualMatrix one;
    one.values = Eigen::MatrixXd(1, 4);
    one.values << 1, 4, 2, 8;
    const auto c1 = residual_covariance(standardize_rows(one));
    CHECK(c1(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

    const auto cov2 = residual_covariance(standardize_rows(ResidualMatrix{oracle::gaussian(30, 45, 10), 0, 1.0}));
    CHECK((cov2 - cov2.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(symmetric_spectrum(cov2).min() >= 0.0);
    for (Eigen::Index i = 0; i < 30; ++i) {
        CHECK(cov2(i, i) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("iid noise residual spectrum follows Marchenko-Pastur") {
    const DataMatrix r(oracle::gaussian(200, 400, 12));
    const auto spectrum = residual_spectrum(r, 0);
    const BinningPolicy grid{100, 0.0, 1.1 * std::max(spectrum.max(), (1 + std::sqrt(0.5)) * (1 + std::sqrt(0.5)))};
    CHECK(js_divergence(esd(spectrum, grid), mp_density_on_grid(0.5, 1.0, grid)) < 0.05);
}

TEST_CASE("pipeline is deterministic") {
    const DataMatrix r(oracle::gaussian(30, 60, 13));
    const BinningPolicy grid{50, 0.0, 5.0};
    CHECK(residual_esd(r, 2, grid).mass() == residual_esd(r, 2, grid).mass());
    CHECK(residual_spectrum(r, 3).values() == ResidualLadder(r).spectrum(3).values());
}

}
