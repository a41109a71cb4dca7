#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "specfactor/error.hpp"
#include "specfactor/synthetic.hpp"
#include "specfactor/window.hpp"

using namespace specfactor;

namespace {

WindowConfig small_config(int width, int step) {
    WindowConfig cfg;
    cfg.width = width;
    cfg.step = step;
    cfg.estimator.p_max = 4;
    cfg.estimator.phi_grid = {0.2, 0.4, 0.6, 0.8, 1.0};
    cfg.estimator.threads = 2;
    return cfg;
}

}  // namespace

TEST_SUITE("window") {

TEST_CASE("series length and end indices") {
    const DataMatrix data(oracle::gaussian(10, 137, 1));
    for (int step : {1, 7, 25, 137}) {
        const auto cfg = small_config(40, step);
        const auto series = sliding_estimates(data, cfg);
        CHECK(series.entries.size() == static_cast<std::size_t>((137 - 40) / step + 1));
        for (std::size_t k = 0; k < series.entries.size(); ++k) {
            CHECK(series.entries[k].end_index == 40 + static_cast<int>(k) * step);
            CHECK(series.entries[k].ok());
        }
    }
}

TEST_CASE("a single window equals the plain estimate") {
    const DataMatrix data(oracle::gaussian(12, 60, 2));
    const auto cfg = small_config(60, 60);
    const auto series = sliding_estimates(data, cfg);
    REQUIRE(series.entries.size() == 1);
    const auto plain = estimate(data, cfg.estimator);
    CHECK(series.entries[0].end_index == 60);
    CHECK(series.entries[0].p_hat == plain.p_hat);
    CHECK(series.entries[0].phi_hat == plain.phi_hat);
    CHECK(series.entries[0].d_min == plain.d_min);
}

TEST_CASE("windows are estimated independently of evaluation order") {
    const DataMatrix data(oracle::gaussian(10, 120, 3));
    const auto cfg = small_config(30, 9);
    ModelCache cache;
    const auto base = sliding_estimates(data, cfg, cache);
    std::vector<std::size_t> order(base.entries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937 gen(4);
    std::shuffle(order.begin(), order.end(), gen);
    ModelCache fresh;
    const auto shuffled = sliding_estimates_ordered(data, cfg, order, fresh);
    REQUIRE(shuffled.entries.size() == base.entries.size());
    for (std::size_t k = 0; k < base.entries.size(); ++k) {
        CHECK(shuffled.entries[k].end_index == base.entries[k].end_index);
        CHECK(shuffled.entries[k].p_hat == base.entries[k].p_hat);
        CHECK(shuffled.entries[k].phi_hat == base.entries[k].phi_hat);
        CHECK(shuffled.entries[k].d_min == base.entries[k].d_min);
    }
    std::vector<std::size_t> bad(order.size(), 0);
    CHECK_THROWS_AS(sliding_estimates_ordered(data, cfg, bad, fresh), ConfigError);
}

TEST_CASE("a degenerate window becomes a tagged gap") {
    Eigen::MatrixXd x = oracle::gaussian(6, 100, 5);
    x.row(2).segment(50, 50).setConstant(1.0);  // constant over the last half
    const auto series = sliding_estimates(DataMatrix(x), small_config(30, 10));
    bool saw_gap = false;
    for (const auto& e : series.entries) {
        if (e.end_index - 30 >= 50) {
            CHECK_FALSE(e.ok());
            CHECK(e.error.find("row 2") != std::string::npos);
            saw_gap = true;
        } else {
            CHECK(e.ok());
        }
    }
    CHECK(saw_gap);
}

TEST_CASE("configuration checks") {
    const DataMatrix data(oracle::gaussian(10, 50, 6));
    CHECK_THROWS_AS(sliding_estimates(data, small_config(10, 1)), ConfigError);  // width <= N
    CHECK_THROWS_AS(sliding_estimates(data, small_config(60, 1)), ConfigError);  // width > T
    CHECK_THROWS_AS(sliding_estimates(data, small_config(20, 0)), ConfigError);
}

TEST_CASE("no-event scenario keeps p_hat flat") {
    ScenarioConfig sc;
    sc.n = 40;
    sc.t = 300;
    WindowConfig cfg;
    cfg.width = 100;
    cfg.step = 20;
    const auto series = sliding_estimates(generate_scenario(sc), cfg);
    int lo = 1000, hi = -1;
    for (const auto& e : series.entries) {
        REQUIRE(e.ok());
        lo = std::min(lo, e.p_hat);
        hi = std::max(hi, e.p_hat);
    }
    CHECK(hi - lo <= 1);
}

}
