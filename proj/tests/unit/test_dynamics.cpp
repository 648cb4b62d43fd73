#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "ubi/dynamics.hpp"
#include "ubi/rng.hpp"

using namespace ubi;

namespace {

DriverParams sample_params(RngStream& rng) {
    DriverParams d;
    d.beta_p = rng.uniform(0.0, 3.0);
    d.beta_y = rng.uniform(0.0, 3.0);
    d.theta_p = rng.uniform(0.05, 1.0);
    d.theta_y = rng.uniform(0.05, 1.0);
    d.baseline_p = rng.uniform(0.0, 1.0);
    d.baseline_y = rng.uniform(0.0, 8000.0);
    d.premium = rng.uniform(500.0, 1500.0);
    return d;
}

constexpr double kYMax = 10000.0;

}  // namespace

TEST_CASE("baseline is the zero-discount fixed point, exactly") {
    RngStream rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const DriverParams d = sample_params(rng);
        const DriverState at_baseline{d.baseline_p, d.baseline_y};
        const DriverState next = step(at_baseline, d, 0.0, kYMax);
        CHECK(next.p == d.baseline_p);
        CHECK(next.y == d.baseline_y);
    }
}

TEST_CASE("theta = 1 with zero discount is the identity on p") {
    DriverParams d;
    d.theta_p = 1.0;
    d.theta_y = 1.0;
    d.baseline_p = 0.2;
    d.baseline_y = 100.0;
    const DriverState s{0.7, 50.0};
    const DriverState next = step(s, d, 0.0, kYMax);
    CHECK(next.p == doctest::Approx(0.7).epsilon(0));
    CHECK(next.y == doctest::Approx(50.0).epsilon(0));
}

TEST_CASE("hand evaluation of the probability recurrence") {
    // p' = -1.2*0.1*0.05 + 0.3*(0.05-0.04) + 0.04 = -0.006 + 0.003 + 0.04
    DriverParams d;
    d.beta_p = 1.2;
    d.theta_p = 0.3;
    d.baseline_p = 0.04;
    d.theta_y = 0.5;
    d.baseline_y = 0.0;
    const DriverState next = step({0.05, 0.0}, d, 0.1, kYMax);
    CHECK(next.p == doctest::Approx(0.037).epsilon(1e-12));
}

TEST_CASE("clamping keeps the state in range") {
    DriverParams d;
    d.beta_p = 3.0;
    d.theta_p = 0.1;
    d.baseline_p = 0.0;
    d.theta_y = 0.5;
    d.baseline_y = 0.0;
    // Unclamped p' = (0.1 - 3*0.2)*0.9 < 0.
    const DriverState next = step({0.9, 0.0}, d, 0.2, kYMax);
    CHECK(next.p == 0.0);

    DriverParams up;
    up.theta_y = 1.0;
    up.baseline_y = 0.0;
    up.theta_p = 1.0;
    const DriverState clamped = step({0.0, 90.0}, up, 0.0, 80.0);
    CHECK(clamped.y == 80.0);
}

TEST_CASE("step rejects bad inputs") {
    const DriverParams d;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(step({nan, 0.0}, d, 0.0, kYMax), std::invalid_argument);
    CHECK_THROWS_AS(step({0.5, 0.0}, d, nan, kYMax), std::invalid_argument);
    CHECK_THROWS_AS(step({0.5, 0.0}, d, -0.1, kYMax), std::invalid_argument);
    CHECK_THROWS_AS(step({0.5, 0.0}, d, 1.5, kYMax), std::invalid_argument);
}

TEST_CASE("contraction toward baseline at zero discount") {
    RngStream rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        DriverParams d = sample_params(rng);
        d.theta_p = rng.uniform(0.05, 0.95);
        d.baseline_p = rng.uniform(0.1, 0.9);
        const double p = rng.uniform(0.1, 0.9);
        const DriverState next = step({p, d.baseline_y}, d, 0.0, kYMax);
        CHECK(std::abs(next.p - d.baseline_p) ==
              doctest::Approx(d.theta_p * std::abs(p - d.baseline_p)).epsilon(1e-12));
    }
}

TEST_CASE("finite-difference slope matches theta - beta*c") {
    RngStream rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        DriverParams d = sample_params(rng);
        d.baseline_p = 0.5;  // keep the step well away from the clamp
        const double c = rng.uniform(0.0, 0.2);
        const double p = rng.uniform(0.4, 0.6);
        const double h = 1e-5;
        const double up = step({p + h, 100.0}, d, c, kYMax).p;
        const double dn = step({p - h, 100.0}, d, c, kYMax).p;
        const double slope = (up - dn) / (2 * h);
        CHECK(slope == doctest::Approx(d.theta_p - d.beta_p * c).epsilon(1e-9));
    }
}

TEST_CASE("larger discounts never raise the next state") {
    RngStream rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const DriverParams d = sample_params(rng);
        const DriverState s{rng.uniform(0.0, 1.0), rng.uniform(0.0, kYMax)};
        const double c1 = rng.uniform(0.0, 0.2);
        const double c2 = rng.uniform(c1, 0.2);
        const DriverState a = step(s, d, c1, kYMax);
        const DriverState b = step(s, d, c2, kYMax);
        CHECK(b.p <= a.p);
        CHECK(b.y <= a.y);
    }
}

TEST_CASE("rollout of zeros from baseline stays at baseline") {
    RngStream rng(17);
    const DriverParams d = sample_params(rng);
    const DiscountSchedule zeros(6, 0.0);
    const auto states = rollout({d.baseline_p, d.baseline_y}, d, zeros, kYMax);
    REQUIRE(states.size() == 7);
    for (const DriverState& s : states) {
        CHECK(s.p == d.baseline_p);
        CHECK(s.y == d.baseline_y);
    }
}

TEST_CASE("empty schedule yields only the initial state") {
    const DriverParams d;
    const auto states = rollout({0.3, 10.0}, d, {}, kYMax);
    REQUIRE(states.size() == 1);
    CHECK(states[0].p == 0.3);
}

TEST_CASE("rollout equals repeated step application") {
    RngStream rng(19);
    for (int trial = 0; trial < 50; ++trial) {
        const DriverParams d = sample_params(rng);
        DiscountSchedule schedule;
        for (int t = 0; t < 8; ++t) schedule.push_back(rng.uniform(0.0, 0.2));
        const DriverState initial{rng.uniform(0.0, 1.0), rng.uniform(0.0, kYMax)};
        const auto states = rollout(initial, d, schedule, kYMax);
        DriverState s = initial;
        for (std::size_t t = 0; t < schedule.size(); ++t) {
            s = step(s, d, schedule[t], kYMax);
            CHECK(states[t + 1].p == s.p);
            CHECK(states[t + 1].y == s.y);
        }
    }
}

TEST_CASE("stage cost") {
    DriverParams d;
    d.premium = 800.0;
    CHECK(stage_cost(d, 0.0, {0.0, 5000.0}) == 0.0);
    CHECK(stage_cost(d, 0.1, {0.04, 5000.0}) == doctest::Approx(280.0).epsilon(1e-14));
    d.baseline_p = 0.05;
    d.baseline_y = 4000.0;
    CHECK(stage_cost(d, 0.2, {d.baseline_p, d.baseline_y}) ==
          doctest::Approx(0.2 * 800.0 + 0.05 * 4000.0).epsilon(1e-14));
}

TEST_CASE("parameter validation") {
    DriverParams d;
    d.theta_p = 0.0;
    CHECK_THROWS_AS(validate(d), std::invalid_argument);
    d.theta_p = 0.5;
    d.theta_y = 0.5;
    d.premium = 0.0;
    CHECK_THROWS_AS(validate(d), std::invalid_argument);
    d.premium = 100.0;
    d.baseline_p = 1.5;
    CHECK_THROWS_AS(validate(d), std::invalid_argument);
}
