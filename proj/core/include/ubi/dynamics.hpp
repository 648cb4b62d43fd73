#pragma once

#include <vector>

namespace ubi {

// Per-driver behavioral constants.
struct DriverParams {
    double beta_p = 0.0;      // discount sensitivity of claim probability, >= 0
    double beta_y = 0.0;      // discount sensitivity of claim amount, >= 0
    double theta_p = 1.0;     // mean-reversion retention rate for p, in (0, 1]
    double theta_y = 1.0;     // mean-reversion retention rate for y, in (0, 1]
    double baseline_p = 0.0;  // baseline claim probability, in [0, 1]
    double baseline_y = 0.0;  // baseline expected claim amount, >= 0
    double premium = 1.0;     // full undiscounted premium, > 0
};

// State of one driver at one period: (claim probability, expected claim amount).
struct DriverState {
    double p = 0.0;
    double y = 0.0;
};

// Discounts per period, each in [0, eta].
using DiscountSchedule = std::vector<double>;

struct Driver {
    DriverParams params;
    DriverState initial;
};

// Throws std::invalid_argument when a field is non-finite or out of range.
void validate(const DriverParams& params);
void validate(const DriverState& state, double y_max);

// One period of the behavioral recurrences
//   p' = -beta_p * c * p + theta_p * (p - P) + P
//   y' = -beta_y * c * y + theta_y * (y - Y) + Y
// clamped componentwise to [0,1] x [0, y_max]. Pure and deterministic.
// Rejects non-finite inputs and discounts outside [0, 1].
DriverState step(const DriverState& state, const DriverParams& params, double discount,
                 double y_max);

// States for the whole schedule, including the initial one (length + 1 entries).
std::vector<DriverState> rollout(const DriverState& initial, const DriverParams& params,
                                 const DiscountSchedule& schedule, double y_max);

// Per-period cost seen by the insurer: discount * premium + next.p * next.y.
double stage_cost(const DriverParams& params, double discount, const DriverState& next);

// Sum of p_{t+1} * y_{t+1} under an all-zero schedule of the given length.
double zero_discount_cost(const DriverState& initial, const DriverParams& params, int periods,
                          double y_max);

}  // namespace ubi
