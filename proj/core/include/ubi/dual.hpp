#pragma once

#include <span>
#include <vector>

#include "ubi/dp.hpp"
#include "ubi/dynamics.hpp"

namespace ubi {

// Multipliers plus subgradient-iteration bookkeeping.
struct DualState {
    std::vector<double> lambdas;  // one per decision period, >= 0
    int iteration = 0;
    int decay_anchor = 0;         // iteration at which the decaying phase started
    std::vector<double> usage;    // last aggregate budget usage per period
    double dual_value = 0.0;      // last D(lambda)
};

struct SolverConfig {
    double budget = 0.0;           // per-period budget, currency
    double eta = 0.2;              // discount cap
    double alpha0 = 0.0;           // 0 = auto: 1 / (N * max premium * eta)
    double decay_exponent = 0.5;
    double eps_feasibility = 0.0;  // 0 = auto: eps_feasibility_fraction * budget
    double eps_feasibility_fraction = 0.01;
    double eps_lambda = 1e-4;
    int max_outer_iterations = 200;
    int constant_phase_iterations = 20;  // cap on the non-decaying search phase
    bool exact_subproblems = false;      // tiny instances: enumerate instead of grid DP
    int threads = 0;
};

void validate(const SolverConfig& cfg);

// eps_feasibility with the fraction default applied (floored at 1e-9).
double resolved_eps_feasibility(const SolverConfig& cfg);
double resolved_alpha0(const SolverConfig& cfg, std::span<const Driver> portfolio);

struct DualEvaluation {
    std::vector<DiscountSchedule> schedules;
    std::vector<double> usage;       // per period: sum_i c_{i,t} * premium_i
    double dual_value = 0.0;         // sum_i penalized cost - sum_t lambda_t * budget
    double realized_cost = 0.0;      // sum_i unpenalized realized cost
};

// Solves the N independent penalized subproblems under dual.lambdas (fan-out
// over a worker pool; results reduced in driver order, so the outcome is
// independent of the thread count).
DualEvaluation evaluate_dual(std::span<const Driver> portfolio, const DualState& dual,
                             const GridSpec& grid, const SolverConfig& cfg);

// Projected subgradient ascent: lambda_t <- max(0, lambda_t + alpha_k (U_t - B)).
// alpha_k is constant at alpha0 until the decay anchor, then decays as
// alpha0 / (1 + k - anchor)^exponent.
DualState subgradient_step(const DualState& dual, std::span<const double> usage,
                           const SolverConfig& cfg, std::span<const Driver> portfolio);

struct IterationRecord {
    int iteration = 0;
    double dual_value = 0.0;
    double max_violation = 0.0;
    double lambda_delta = 0.0;  // max-norm of the multiplier update
    double wall_ms = 0.0;
};

struct SolveResult {
    std::vector<DiscountSchedule> schedules;
    DualState dual;
    bool converged = false;
    bool repaired = false;        // no feasible iterate; final one repaired
    double realized_cost = 0.0;   // unpenalized cost of the returned schedules
    double best_dual_value = 0.0;
    std::vector<IterationRecord> history;
};

// Outer loop: alternate evaluate_dual and subgradient_step until the budget
// is met with approximate complementary slackness and the multipliers stop
// moving, or max_outer_iterations. Returns the best feasible iterate's
// schedules (lowest realized cost); if no iterate was feasible, the last
// iterate with a greedy feasibility repair applied.
SolveResult solve(std::span<const Driver> portfolio, int periods, const GridSpec& grid,
                  const SolverConfig& cfg);

}  // namespace ubi
