#include "ubi/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ubi {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void validate(const DriverParams& d) {
    require(finite(d.beta_p) && d.beta_p >= 0.0, "beta_p must be finite and >= 0");
    require(finite(d.beta_y) && d.beta_y >= 0.0, "beta_y must be finite and >= 0");
    require(finite(d.theta_p) && d.theta_p > 0.0 && d.theta_p <= 1.0,
            "theta_p must be in (0, 1]");
    require(finite(d.theta_y) && d.theta_y > 0.0 && d.theta_y <= 1.0,
            "theta_y must be in (0, 1]");
    require(finite(d.baseline_p) && d.baseline_p >= 0.0 && d.baseline_p <= 1.0,
            "baseline_p must be in [0, 1]");
    require(finite(d.baseline_y) && d.baseline_y >= 0.0, "baseline_y must be >= 0");
    require(finite(d.premium) && d.premium > 0.0, "premium must be > 0");
}

void validate(const DriverState& s, double y_max) {
    require(finite(s.p) && s.p >= 0.0 && s.p <= 1.0, "state p must be in [0, 1]");
    require(finite(s.y) && s.y >= 0.0 && s.y <= y_max, "state y must be in [0, y_max]");
}

DriverState step(const DriverState& state, const DriverParams& params, double discount,
                 double y_max) {
    require(finite(state.p) && finite(state.y), "non-finite state");
    require(finite(discount) && discount >= 0.0 && discount <= 1.0,
            "discount must be finite and in [0, 1]");
    require(finite(y_max) && y_max > 0.0, "y_max must be finite and > 0");

    double p_next = -params.beta_p * discount * state.p +
                    params.theta_p * (state.p - params.baseline_p) + params.baseline_p;
    double y_next = -params.beta_y * discount * state.y +
                    params.theta_y * (state.y - params.baseline_y) + params.baseline_y;
    return {std::clamp(p_next, 0.0, 1.0), std::clamp(y_next, 0.0, y_max)};
}

std::vector<DriverState> rollout(const DriverState& initial, const DriverParams& params,
                                 const DiscountSchedule& schedule, double y_max) {
    std::vector<DriverState> states;
    states.reserve(schedule.size() + 1);
    states.push_back(initial);
    for (double c : schedule) {
        states.push_back(step(states.back(), params, c, y_max));
    }
    return states;
}

double stage_cost(const DriverParams& params, double discount, const DriverState& next) {
    return discount * params.premium + next.p * next.y;
}

double zero_discount_cost(const DriverState& initial, const DriverParams& params, int periods,
                          double y_max) {
    DriverState s = initial;
    double total = 0.0;
    for (int t = 0; t < periods; ++t) {
        s = step(s, params, 0.0, y_max);
        total += s.p * s.y;
    }
    return total;
}

}  // namespace ubi
