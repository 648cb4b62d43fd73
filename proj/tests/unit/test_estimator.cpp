#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ubi/estimator.hpp"
#include "ubi/rng.hpp"

using namespace ubi;

namespace {

constexpr double kYMax = 10000.0;

DriverParams truth_driver(RngStream& rng) {
    DriverParams d;
    d.beta_p = rng.uniform(1.0, 1.5);
    d.beta_y = rng.uniform(1.0, 1.5);
    d.theta_p = rng.uniform(0.1, 0.5);
    d.theta_y = rng.uniform(0.1, 0.5);
    d.baseline_p = rng.uniform(0.02, 0.08);
    d.baseline_y = rng.uniform(2000.0, 7000.0);
    d.premium = 800.0;
    return d;
}

ObservationSeries observe(const DriverParams& d, const std::vector<double>& discounts) {
    ObservationSeries obs;
    obs.discounts = discounts;
    const auto states = rollout({d.baseline_p, d.baseline_y}, d, discounts, kYMax);
    for (std::size_t k = 1; k < states.size(); ++k) {
        obs.observed_p.push_back(states[k].p);
        obs.observed_y.push_back(states[k].y);
    }
    return obs;
}

EstimatorConfig config() {
    EstimatorConfig cfg;
    cfg.y_max = kYMax;
    return cfg;
}

}  // namespace

TEST_CASE("loss of the generating candidate is zero") {
    RngStream rng(1);
    const DriverParams d = truth_driver(rng);
    const auto obs = observe(d, {0.1, 0.0, 0.2});
    CHECK(loss(d, {d.baseline_p, d.baseline_y}, obs, config()) ==
          doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("loss at a constant baseline series is zero for the matching candidate") {
    DriverParams d;
    d.theta_p = 0.5;
    d.theta_y = 0.5;
    d.baseline_p = 0.04;
    d.baseline_y = 3000.0;
    d.premium = 700.0;
    const auto obs = observe(d, {0.0, 0.0});
    CHECK(loss(d, {0.04, 3000.0}, obs, config()) == 0.0);
}

TEST_CASE("perturbing beta on an excited series increases the loss") {
    RngStream rng(2);
    DriverParams d = truth_driver(rng);
    const auto obs = observe(d, {0.15, 0.05, 0.2});
    DriverParams perturbed = d;
    perturbed.beta_p += 0.1;
    CHECK(loss(perturbed, {d.baseline_p, d.baseline_y}, obs, config()) > 1e-8);
}

TEST_CASE("loss rejects mismatched series") {
    ObservationSeries obs;
    obs.observed_p = {0.1, 0.2};
    obs.observed_y = {100.0};
    obs.discounts = {0.0, 0.1};
    CHECK_THROWS_AS(loss(DriverParams{}, {0.1, 100.0}, obs, config()),
                    std::invalid_argument);
}

TEST_CASE("loss changes when two time indices swap on a non-constant series") {
    RngStream rng(3);
    const DriverParams d = truth_driver(rng);
    auto obs = observe(d, {0.2, 0.0, 0.1});
    const double base = loss(d, {d.baseline_p, d.baseline_y}, obs, config());
    std::swap(obs.observed_p[0], obs.observed_p[2]);
    std::swap(obs.observed_y[0], obs.observed_y[2]);
    const double swapped = loss(d, {d.baseline_p, d.baseline_y}, obs, config());
    CHECK(swapped > base + 1e-9);

    // constant series: swapping is a no-op
    const auto flat = observe(d, {0.0, 0.0, 0.0});
    auto flat_swapped = flat;
    std::swap(flat_swapped.observed_p[0], flat_swapped.observed_p[2]);
    CHECK(loss(d, {d.baseline_p, d.baseline_y}, flat, config()) ==
          loss(d, {d.baseline_p, d.baseline_y}, flat_swapped, config()));
}

TEST_CASE("noise-free round trip: predictions match the observations") {
    RngStream rng(5);
    for (int trial = 0; trial < 15; ++trial) {
        const DriverParams d = truth_driver(rng);
        std::vector<double> discounts;
        for (int t = 0; t < 3; ++t) discounts.push_back(rng.uniform(0.0, 0.2));
        const auto obs = observe(d, discounts);
        const FitResult fr = fit(obs, d.premium, config(), 100 + trial);
        CHECK(fr.objective <= 1e-3 * static_cast<double>(obs.observed_p.size()));
        const auto predicted = rollout(fr.initial_state, fr.params, obs.discounts, kYMax);
        for (std::size_t k = 0; k < obs.observed_p.size(); ++k) {
            CHECK(std::abs(predicted[k + 1].p - obs.observed_p[k]) <= 5e-3);
            CHECK(std::abs(predicted[k + 1].y - obs.observed_y[k]) <= 5e-3 * kYMax);
        }
    }
}

TEST_CASE("length-2 baseline series with zero discounts fits trivially") {
    ObservationSeries obs;
    obs.observed_p = {0.05, 0.05};
    obs.observed_y = {4000.0, 4000.0};
    obs.discounts = {0.0, 0.0};
    const FitResult fr = fit(obs, 900.0, config(), 7);
    CHECK(fr.objective == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fr.params.baseline_p == doctest::Approx(0.05));
    CHECK(fr.params.baseline_y == doctest::Approx(4000.0));
    CHECK(fr.low_excitation);
    CHECK(fr.params.premium == 900.0);
}

TEST_CASE("fit objective never loses to the brute-force oracle") {
    RngStream rng(11);
    for (int trial = 0; trial < 4; ++trial) {
        const DriverParams d = truth_driver(rng);
        std::vector<double> discounts;
        for (int t = 0; t < 4; ++t) discounts.push_back(rng.uniform(0.0, 0.2));
        auto obs = observe(d, discounts);
        if (trial % 2 == 1) {
            // corrupt the series so the optimum is nonzero
            RngStream noise(trial);
            for (double& p : obs.observed_p) {
                p = std::min(1.0, std::max(0.0, p + 0.02 * noise.symmetric()));
            }
        }
        const FitResult best = fit(obs, d.premium, config(), 50 + trial);
        const FitResult oracle = brute_force_fit(obs, d.premium, 5, config());
        CHECK(best.objective <= oracle.objective + 1e-6);
    }
}

TEST_CASE("fit respects the box constraints") {
    RngStream rng(13);
    const DriverParams d = truth_driver(rng);
    const auto obs = observe(d, {0.2, 0.0, 0.1, 0.05});
    const EstimatorConfig cfg = config();
    const FitResult fr = fit(obs, d.premium, cfg, 3);
    CHECK(fr.params.beta_p >= 0.0);
    CHECK(fr.params.beta_p <= cfg.beta_max);
    CHECK(fr.params.theta_p >= cfg.theta_min);
    CHECK(fr.params.theta_p <= 1.0);
    CHECK(fr.params.baseline_p >= 0.0);
    CHECK(fr.params.baseline_p <= 1.0);
    CHECK(fr.params.baseline_y <= cfg.y_max);
    CHECK(fr.initial_state.p <= 1.0);
    CHECK(fr.initial_state.y <= cfg.y_max);
}

TEST_CASE("fit is deterministic given the seed") {
    RngStream rng(17);
    const DriverParams d = truth_driver(rng);
    const auto obs = observe(d, {0.1, 0.2, 0.0});
    const FitResult a = fit(obs, d.premium, config(), 42);
    const FitResult b = fit(obs, d.premium, config(), 42);
    CHECK(a.objective == b.objective);
    CHECK(a.params.beta_p == b.params.beta_p);
    CHECK(a.initial_state.p == b.initial_state.p);
}

TEST_CASE("single discount level is flagged as low excitation") {
    RngStream rng(19);
    const DriverParams d = truth_driver(rng);
    const auto obs = observe(d, {0.1, 0.1, 0.1});
    const FitResult fr = fit(obs, d.premium, config(), 1);
    CHECK(fr.low_excitation);
}

TEST_CASE("brute force recovers a grid-aligned ground truth exactly") {
    EstimatorConfig cfg = config();
    cfg.y_max = 8000.0;
    DriverParams d;
    // every value sits on the 5-point grid of its axis
    d.beta_p = 1.25;   // index 1 of [0, 5]
    d.beta_y = 2.5;    // index 2
    d.theta_p = cfg.theta_min + (1.0 - cfg.theta_min) * 0.25;
    d.theta_y = cfg.theta_min + (1.0 - cfg.theta_min) * 0.5;
    d.baseline_p = 0.25;
    d.baseline_y = 2000.0;  // index 1 of [0, 8000]
    d.premium = 800.0;
    ObservationSeries obs;
    obs.discounts = {0.1, 0.05, 0.2};
    const auto states = rollout({0.5, 4000.0}, d, obs.discounts, cfg.y_max);
    for (std::size_t k = 1; k < states.size(); ++k) {
        obs.observed_p.push_back(states[k].p);
        obs.observed_y.push_back(states[k].y);
    }
    const FitResult fr = brute_force_fit(obs, d.premium, 5, cfg);
    CHECK(fr.objective == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fr.params.beta_p == doctest::Approx(1.25));
    CHECK(fr.initial_state.p == doctest::Approx(0.5));
    CHECK(fr.initial_state.y == doctest::Approx(4000.0));
}

TEST_CASE("nested grids never increase the oracle objective") {
    RngStream rng(23);
    const DriverParams d = truth_driver(rng);
    auto obs = observe(d, {0.15, 0.0, 0.1});
    RngStream noise(29);
    for (double& p : obs.observed_p) {
        p = std::min(1.0, std::max(0.0, p + 0.01 * noise.symmetric()));
    }
    const FitResult coarse = brute_force_fit(obs, d.premium, 3, config());
    const FitResult fine = brute_force_fit(obs, d.premium, 5, config());  // 3 -> 2*3-1 nests
    CHECK(fine.objective <= coarse.objective + 1e-12);
}

TEST_CASE("brute force rejects tiny grids") {
    ObservationSeries obs;
    obs.observed_p = {0.1, 0.1};
    obs.observed_y = {10.0, 10.0};
    obs.discounts = {0.0, 0.1};
    CHECK_THROWS_AS(brute_force_fit(obs, 800.0, 2, config()), std::invalid_argument);
}
