#pragma once

#include <cstdint>
#include <vector>

#include "ubi/dynamics.hpp"

namespace ubi {

// One driver's observed trajectory: discounts[k] was applied before the k-th
// observation, so observation k corresponds to the state after k+1 steps.
struct ObservationSeries {
    std::vector<double> observed_p;
    std::vector<double> observed_y;
    std::vector<double> discounts;
};

void validate(const ObservationSeries& obs);

struct EstimatorConfig {
    double loss_weight = 0.0;  // severity-loss weight; <= 0 means 1 / mean(observed_y)
    int multistart_count = 8;
    int max_iterations = 60;   // coordinate sweeps per start
    double tolerance = 1e-11;  // objective-improvement stopping threshold
    double beta_max = 5.0;     // search box: beta in [0, beta_max]
    double theta_min = 1e-3;   // search box: theta in [theta_min, 1]
    double y_max = 0.0;        // required > 0; bounds Y and y0, and clamps rollouts
};

void validate(const EstimatorConfig& cfg);
double resolved_loss_weight(const EstimatorConfig& cfg, const ObservationSeries& obs);

struct FitResult {
    DriverParams params;  // premium copied from the input, not estimated
    DriverState initial_state;
    double objective = 0.0;
    bool low_excitation = false;  // fewer than two distinct discount levels
};

// Weighted absolute deviation of the candidate's clamped rollout from the
// observations: sum_k |p_k - observed_p[k]| + weight * |y_k - observed_y[k]|.
double loss(const DriverParams& params, const DriverState& initial, const ObservationSeries& obs,
            const EstimatorConfig& cfg);

// Multistart projected coordinate descent over the 8 free scalars
// (beta_p, beta_y, theta_p, theta_y, P, Y, p0, y0), each axis minimized by a
// coarse scan plus golden-section within its box. Starts include two
// deterministic data-driven candidates (a teacher-forced surrogate fit and a
// per-chain box scan) plus multistart_count seeded random points.
// Deterministic given the seed.
FitResult fit(const ObservationSeries& obs, double premium, const EstimatorConfig& cfg,
              std::uint64_t seed);

// Independent oracle: exhaustive evaluation on the Cartesian grid over all 8
// parameters (grid_points_per_axis each) within the same search boxes.
FitResult brute_force_fit(const ObservationSeries& obs, double premium, int grid_points_per_axis,
                          const EstimatorConfig& cfg);

}  // namespace ubi
