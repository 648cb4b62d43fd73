#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ubi/dual.hpp"
#include "ubi/dynamics.hpp"

namespace ubi {

// A tiny instance the exhaustive oracle can solve.
struct GapInstance {
    std::vector<Driver> drivers;
    double budget = 0.0;  // per-period budget for this (base) portfolio
    int periods = 2;
    int candidates = 3;  // K; the oracle and the dual share this action set
};

struct GapReport {
    int n = 0;  // portfolio size after replication
    double primal_optimum = 0.0;
    double dual_value = 0.0;  // best D(lambda) found
    double gap = 0.0;
    double bound = 0.0;  // (M+1) * y_max + max premium
};

struct ExhaustiveResult {
    std::vector<DiscountSchedule> schedules;
    double cost = 0.0;
};

// Enumerates all K^(N*M) joint candidate schedules (depth-first with budget
// and cost pruning), keeps the per-period-budget-feasible ones and returns
// the minimizer under the exact clamped dynamics.
// Requires N * M * log2(K) <= 24 bits of search space.
ExhaustiveResult exhaustive_primal(std::span<const Driver> portfolio, int periods,
                                   const GridSpec& grid, double budget);

// Replicates the base drivers N times with budget scaled to N*b, solves both
// exhaustively and by the dual loop (exact subproblem evaluation, so every
// D(lambda) is a true lower bound), and reports gap and the Corollary bound
// per replication count.
std::vector<GapReport> measure_gap(const GapInstance& base, std::span<const int> replications,
                                   const GridSpec& grid, SolverConfig solver_cfg);

// Seeded random tiny instance within the caps; used by the gap command and
// the verification suites.
GapInstance random_gap_instance(std::uint64_t seed, std::uint64_t index, int max_drivers,
                                int max_periods, int max_candidates, double eta);

}  // namespace ubi
