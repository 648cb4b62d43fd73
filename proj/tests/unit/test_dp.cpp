#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ubi/dp.hpp"
#include "ubi/rng.hpp"

using namespace ubi;

namespace {

DriverParams sample_driver(RngStream& rng) {
    DriverParams d;
    d.beta_p = rng.uniform(1.0, 1.5);
    d.beta_y = rng.uniform(1.0, 1.5);
    d.theta_p = rng.uniform(0.1, 0.5);
    d.theta_y = rng.uniform(0.1, 0.5);
    d.baseline_p = rng.uniform(0.02, 0.08);
    d.baseline_y = rng.uniform(2000.0, 8000.0);
    d.premium = rng.uniform(600.0, 1000.0);
    return d;
}

// Plain reference recursion over the same grid; shares nothing with the
// production backward induction beyond the grid definition.
double reference_value(const DriverParams& d, const std::vector<double>& lambdas,
                       const GridSpec& grid, const DriverState& s, std::size_t t) {
    if (t == lambdas.size()) return 0.0;
    double best = 1e300;
    for (double c : discount_candidates(grid)) {
        const DriverState nxt = step(s, d, c, grid.y_max);
        // reference bilinear interpolation of the recursively defined layer,
        // evaluated on grid nodes one level down
        const int pn = grid.p_nodes, yn = grid.y_nodes;
        std::vector<double> layer(static_cast<std::size_t>(pn) * yn);
        for (int ip = 0; ip < pn; ++ip) {
            for (int iy = 0; iy < yn; ++iy) {
                const DriverState node{static_cast<double>(ip) / (pn - 1),
                                       grid.y_max * iy / (yn - 1)};
                layer[static_cast<std::size_t>(ip) * yn + iy] =
                    reference_value(d, lambdas, grid, node, t + 1);
            }
        }
        const double q = (1.0 + lambdas[t]) * d.premium * c + nxt.p * nxt.y +
                         interpolate(layer, grid, nxt);
        best = std::min(best, q);
    }
    return best;
}

}  // namespace

TEST_CASE("interpolation is exact at nodes") {
    GridSpec grid;
    grid.p_nodes = 5;
    grid.y_nodes = 4;
    grid.y_max = 300.0;
    RngStream rng(3);
    std::vector<double> layer(20);
    for (double& v : layer) v = rng.uniform(0.0, 10.0);
    for (int ip = 0; ip < 5; ++ip) {
        for (int iy = 0; iy < 4; ++iy) {
            const DriverState q{ip / 4.0, 300.0 * iy / 3.0};
            CHECK(interpolate(layer, grid, q) ==
                  doctest::Approx(layer[ip * 4 + iy]).epsilon(1e-12));
        }
    }
}

TEST_CASE("constant corners interpolate to the constant") {
    GridSpec grid;
    grid.p_nodes = 2;
    grid.y_nodes = 2;
    grid.y_max = 1.0;
    const std::vector<double> layer{7.5, 7.5, 7.5, 7.5};
    RngStream rng(5);
    for (int i = 0; i < 20; ++i) {
        const DriverState q{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
        CHECK(interpolate(layer, grid, q) == doctest::Approx(7.5).epsilon(1e-13));
    }
}

TEST_CASE("unit cell center averages the four corners") {
    GridSpec grid;
    grid.p_nodes = 2;
    grid.y_nodes = 2;
    grid.y_max = 1.0;
    const std::vector<double> layer{0.0, 1.0, 2.0, 3.0};  // row-major
    CHECK(interpolate(layer, grid, {0.5, 0.5}) == doctest::Approx(1.5).epsilon(1e-13));
}

TEST_CASE("interpolation rejects out-of-domain queries") {
    GridSpec grid;
    grid.y_max = 100.0;
    std::vector<double> layer(static_cast<std::size_t>(grid.p_nodes) * grid.y_nodes, 0.0);
    CHECK_THROWS_AS(interpolate(layer, grid, {1.1, 50.0}), std::domain_error);
    CHECK_THROWS_AS(interpolate(layer, grid, {0.5, 101.0}), std::domain_error);
}

TEST_CASE("interpolation is non-expansive in the max norm") {
    GridSpec grid;
    grid.p_nodes = 7;
    grid.y_nodes = 6;
    grid.y_max = 500.0;
    RngStream rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> layer(42);
        double maxval = 0.0;
        for (double& v : layer) {
            v = rng.uniform(-50.0, 50.0);
            maxval = std::max(maxval, std::abs(v));
        }
        for (int i = 0; i < 50; ++i) {
            const DriverState q{rng.uniform(0.0, 1.0), rng.uniform(0.0, 500.0)};
            CHECK(std::abs(interpolate(layer, grid, q)) <= maxval + 1e-12);
        }
    }
}

TEST_CASE("terminal layer is identically zero and values are nonnegative") {
    RngStream rng(21);
    const DriverParams d = sample_driver(rng);
    GridSpec grid;
    grid.p_nodes = 9;
    grid.y_nodes = 9;
    grid.y_max = 1.25 * d.baseline_y;
    const std::vector<double> lambdas{0.1, 0.0, 0.4};
    const ValueTable table = backward_induction(d, lambdas, grid);
    REQUIRE(table.values.size() == 4);
    REQUIRE(table.policy.size() == 3);
    for (double v : table.values.back()) CHECK(v == 0.0);
    for (const auto& layer : table.values) {
        for (double v : layer) {
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
        }
    }
}

TEST_CASE("final decision layer solves the one-period problem") {
    RngStream rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const DriverParams d = sample_driver(rng);
        GridSpec grid;
        grid.p_nodes = 7;
        grid.y_nodes = 7;
        grid.discount_candidates = 9;
        grid.y_max = 1.25 * d.baseline_y;
        const std::vector<double> lambdas{rng.uniform(0.0, 1.0)};
        const ValueTable table = backward_induction(d, lambdas, grid);
        for (int ip = 0; ip < grid.p_nodes; ++ip) {
            for (int iy = 0; iy < grid.y_nodes; ++iy) {
                const DriverState node{ip / 6.0, grid.y_max * iy / 6.0};
                double expect = 1e300;
                for (double c : discount_candidates(grid)) {
                    const DriverState nxt = step(node, d, c, grid.y_max);
                    expect = std::min(expect,
                                      (1.0 + lambdas[0]) * d.premium * c + nxt.p * nxt.y);
                }
                CHECK(table.values[0][ip * grid.y_nodes + iy] ==
                      doctest::Approx(expect).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("insensitive drivers never get discounts and match the free rollout") {
    RngStream rng(29);
    DriverParams d = sample_driver(rng);
    d.beta_p = 0.0;
    d.beta_y = 0.0;
    GridSpec grid;
    grid.p_nodes = 11;
    grid.y_nodes = 11;
    grid.y_max = 1.25 * d.baseline_y;
    const std::vector<double> lambdas{0.2, 0.0, 0.5, 0.1};
    const ValueTable table = backward_induction(d, lambdas, grid);
    for (const auto& layer : table.policy) {
        for (double c : layer) CHECK(c == 0.0);
    }
    const DriverState start{0.6, grid.y_max * 0.4};
    const RolloutOutcome out = greedy_rollout(table, start, d);
    CHECK(out.schedule == DiscountSchedule(4, 0.0));
    CHECK(out.realized_cost ==
          doctest::Approx(zero_discount_cost(start, d, 4, grid.y_max)).epsilon(1e-12));
}

TEST_CASE("three-layer value matches an independent reference recursion") {
    RngStream rng(31);
    const DriverParams d = sample_driver(rng);
    GridSpec grid;
    grid.p_nodes = 3;
    grid.y_nodes = 3;
    grid.discount_candidates = 3;
    grid.y_max = 1.25 * d.baseline_y;
    const std::vector<double> lambdas{0.15, 0.05};
    const ValueTable table = backward_induction(d, lambdas, grid);
    for (int ip = 0; ip < 3; ++ip) {
        for (int iy = 0; iy < 3; ++iy) {
            const DriverState node{ip / 2.0, grid.y_max * iy / 2.0};
            const double expect = reference_value(d, lambdas, grid, node, 0);
            CHECK(table.values[0][ip * 3 + iy] == doctest::Approx(expect).epsilon(1e-10));
        }
    }
}

TEST_CASE("policy discount is nonincreasing in lambda at fixed nodes") {
    RngStream rng(37);
    for (int trial = 0; trial < 5; ++trial) {
        const DriverParams d = sample_driver(rng);
        GridSpec grid;
        grid.p_nodes = 9;
        grid.y_nodes = 9;
        grid.discount_candidates = 11;
        grid.y_max = 1.25 * d.baseline_y;
        std::vector<double> prev;
        for (double lam : {0.0, 0.1, 0.3, 0.8, 2.0}) {
            const std::vector<double> lambdas(3, lam);
            const ValueTable table = backward_induction(d, lambdas, grid);
            if (!prev.empty()) {
                for (std::size_t i = 0; i < prev.size(); ++i) {
                    CHECK(table.policy[0][i] <= prev[i] + 1e-12);
                }
            }
            prev = table.policy[0];
        }
    }
}

TEST_CASE("greedy rollout never loses to the zero-discount schedule") {
    RngStream rng(41);
    for (int trial = 0; trial < 25; ++trial) {
        const DriverParams d = sample_driver(rng);
        GridSpec grid;
        grid.p_nodes = 17;
        grid.y_nodes = 17;
        grid.discount_candidates = 9;
        grid.y_max = 1.25 * d.baseline_y;
        std::vector<double> lambdas;
        for (int t = 0; t < 6; ++t) lambdas.push_back(rng.uniform(0.0, 1.0));
        const ValueTable table = backward_induction(d, lambdas, grid);
        const DriverState start{d.baseline_p, d.baseline_y};
        const RolloutOutcome out = greedy_rollout(table, start, d);
        const double zero = zero_discount_cost(start, d, 6, grid.y_max);
        CHECK(out.realized_cost <= zero * (1.0 + 1e-9));
    }
}

TEST_CASE("on-node start with node-preserving dynamics matches the stored policy") {
    RngStream rng(43);
    DriverParams d = sample_driver(rng);
    GridSpec grid;
    grid.p_nodes = 11;
    grid.y_nodes = 11;
    grid.y_max = 1.25 * d.baseline_y;
    // Put the baseline exactly on a node; a high lambda makes zero discounts
    // optimal, so the forward state never leaves that node.
    d.baseline_p = 0.5;
    d.baseline_y = grid.y_max * 0.5;
    const std::vector<double> lambdas(4, 50.0);
    const ValueTable table = backward_induction(d, lambdas, grid);
    const RolloutOutcome out = greedy_rollout(table, {d.baseline_p, d.baseline_y}, d);
    const std::size_t node = 5 * grid.y_nodes + 5;
    for (int t = 0; t < 4; ++t) {
        CHECK(out.schedule[t] == table.policy[t][node]);
        CHECK(out.schedule[t] == 0.0);
    }
}

TEST_CASE("exact rollout agrees with the grid rollout when dynamics stay on nodes") {
    // beta = 0 keeps every trajectory at the baseline node, where
    // interpolation is exact, so both evaluators see identical values.
    DriverParams d;
    d.beta_p = 0.0;
    d.beta_y = 0.0;
    d.theta_p = 0.5;
    d.theta_y = 0.5;
    d.baseline_p = 0.5;
    d.baseline_y = 50.0;
    d.premium = 700.0;
    GridSpec grid;
    grid.p_nodes = 3;
    grid.y_nodes = 3;
    grid.discount_candidates = 3;
    grid.y_max = 100.0;
    const std::vector<double> lambdas{0.3, 0.1};
    const ValueTable table = backward_induction(d, lambdas, grid);
    const RolloutOutcome a = greedy_rollout(table, {0.5, 50.0}, d);
    const RolloutOutcome b = exact_greedy_rollout(d, lambdas, {0.5, 50.0}, grid);
    CHECK(a.realized_cost == doctest::Approx(b.realized_cost).epsilon(1e-12));
    CHECK(a.schedule == b.schedule);
}

TEST_CASE("refined policies never increase the penalized cost") {
    RngStream rng(47);
    for (int trial = 0; trial < 10; ++trial) {
        const DriverParams d = sample_driver(rng);
        GridSpec grid;
        grid.p_nodes = 9;
        grid.y_nodes = 9;
        grid.discount_candidates = 7;
        grid.y_max = 1.25 * d.baseline_y;
        const std::vector<double> lambdas{0.2, 0.05, 0.4};
        const ValueTable coarse = backward_induction(d, lambdas, grid);
        GridSpec refined_grid = grid;
        refined_grid.refine_policy = true;
        const ValueTable refined = backward_induction(d, lambdas, refined_grid);
        for (std::size_t i = 0; i < coarse.values[0].size(); ++i) {
            CHECK(refined.values[0][i] <= coarse.values[0][i] + 1e-12);
        }
    }
}

TEST_CASE("grid spacing and validation") {
    GridSpec grid;
    grid.p_nodes = 11;
    grid.y_nodes = 21;
    grid.y_max = 100.0;
    CHECK(grid_spacing(grid) == doctest::Approx(5.0));
    grid.p_nodes = 1;
    CHECK_THROWS_AS(validate(grid), std::invalid_argument);
    grid.p_nodes = 11;
    grid.discount_candidates = 1;
    CHECK_THROWS_AS(validate(grid), std::invalid_argument);
}
