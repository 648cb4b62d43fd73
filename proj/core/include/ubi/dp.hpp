#pragma once

#include <span>
#include <vector>

#include "ubi/dynamics.hpp"

namespace ubi {

// Uniform (p, y) grid over [0,1] x [0, y_max] plus the discretized action set:
// discount_candidates equally spaced discounts spanning [0, eta].
struct GridSpec {
    int p_nodes = 41;
    int y_nodes = 41;
    double y_max = 1.0;
    int discount_candidates = 21;
    double eta = 0.2;
    bool refine_policy = false;  // one golden-section pass between the best candidate's neighbors
};

void validate(const GridSpec& grid);

// max(Delta_p, Delta_y)
double grid_spacing(const GridSpec& grid);

std::vector<double> discount_candidates(const GridSpec& grid);

// Value function layers for one driver over periods t in {s..T}, with the
// greedy policy for the decision periods {s..T-1}. Layer 0 corresponds to the
// first decision period; the last layer is the terminal one (identically 0).
struct ValueTable {
    GridSpec grid;
    std::vector<double> lambdas;              // multipliers used to build the table
    std::vector<std::vector<double>> values;  // lambdas.size()+1 layers, row-major [ip*y_nodes+iy]
    std::vector<std::vector<double>> policy;  // lambdas.size() layers
};

// Bilinear interpolation on the enclosing cell; exact at nodes. Rejects
// queries outside [0,1] x [0,y_max] (those indicate a clamping bug upstream).
double interpolate(std::span<const double> layer, const GridSpec& grid, const DriverState& query);

// Backward induction for the penalized subproblem
//   V_t(s) = min_c { (1+lambda_t) * premium * c + p'y' + V_{t+1}(p', y') }
// with terminal layer 0. Ties break toward the smaller discount.
ValueTable backward_induction(const DriverParams& params, std::span<const double> lambdas,
                              const GridSpec& grid);

struct RolloutOutcome {
    DiscountSchedule schedule;
    std::vector<DriverState> states;  // schedule.size() + 1 entries
    double realized_cost = 0.0;       // sum of premium*c + p'y', no penalty
    double penalized_cost = 0.0;      // sum of (1+lambda_t)*premium*c + p'y'
};

// Forward pass from a continuous initial state. Each period re-minimizes
// Q(c) at the current off-grid state over the candidate set (interpolating
// the next value layer) instead of snapping to the nearest node policy.
RolloutOutcome greedy_rollout(const ValueTable& table, const DriverState& initial,
                              const DriverParams& params);

// Exact variant used by the tiny-instance oracle machinery: child values are
// enumerated over the full candidate tree, no grid and no interpolation.
// Requires discount_candidates^periods to stay small; throws otherwise.
RolloutOutcome exact_greedy_rollout(const DriverParams& params, std::span<const double> lambdas,
                                    const DriverState& initial, const GridSpec& grid);

}  // namespace ubi
