#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ubi/dual.hpp"
#include "ubi/dynamics.hpp"
#include "ubi/estimator.hpp"

namespace ubi {

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

// Uniform-draw ranges for synthetic portfolios.
struct GenerationRanges {
    Range beta{1.0, 1.5};
    Range theta{0.1, 0.5};
    Range premium{600.0, 1000.0};
    Range baseline_p{0.02, 0.08};
    Range baseline_y{2000.0, 8000.0};
};

void validate(const GenerationRanges& ranges);

// Draws every parameter independently uniform within its range; the initial
// state is the driver's baselines. Per-driver RNG streams keyed by
// (seed, driver index), so results are independent of iteration order.
std::vector<Driver> generate(int n, const GenerationRanges& ranges, std::uint64_t seed);

// 1.25 x the largest baseline_y in the portfolio; used when y_max is left on auto.
double derive_y_max(std::span<const Driver> portfolio);

struct WarmupConfig {
    int periods = 2;            // w >= 1 random-discount excitation periods
    double eta = 0.2;
    double noise_level = 0.0;   // additive uniform: +-level on p, +-level*y_max on y
    double y_max = 0.0;
};

// Applies w periods of uniform-random discounts in [0, eta] per driver and
// records the observed (p, y) after each step, optionally noise-corrupted
// (clamped back to the valid ranges).
std::vector<ObservationSeries> warmup(std::span<const Driver> portfolio,
                                      const WarmupConfig& cfg, std::uint64_t seed);

enum class ParamMode { kOracle, kEstimated };

struct ExperimentConfig {
    int horizon = 8;  // T; decision years are 0..T-1
    ParamMode mode = ParamMode::kOracle;
    int warmup_periods = 2;      // estimated mode: random-discount years 0..w-1
    double observation_noise = 0.0;
    double y_max = 0.0;
};

struct YearRow {
    double expected_claim_cost = 0.0;  // sum_i p_t * y_t
    double reward_outlay = 0.0;        // sum_i c_t * premium_i
    double total_loss = 0.0;
    double mean_claim_prob = 0.0;
};

struct YearSolveInfo {
    int year = 0;
    bool solved = false;  // false for warmup years
    bool converged = false;
    bool repaired = false;
    int iterations = 0;
};

struct ExperimentReport {
    std::vector<YearRow> per_year;       // years 0..T-1
    double baseline_total_loss = 0.0;    // year-0 no-incentive total (claims only)
    double reduction_fraction = 0.0;     // (baseline - mean total of years 1..T-1) / baseline
    std::vector<YearSolveInfo> solves;
    std::vector<std::vector<IterationRecord>> histories;  // one per year, empty for warmup years
    // Full-window per-driver accounting: sum of c_t*premium + p_{t+1}*y_{t+1}
    // over all decision years, and the same drivers' zero-discount cost.
    std::vector<double> per_driver_cost;
    std::vector<double> per_driver_zero_cost;
};

// Receding-horizon experiment: at year s solve over {s..T} and apply only the
// year-s discounts; in estimated mode years 0..w-1 instead apply random
// excitation discounts and every later year refits each driver from its
// accumulated observations before solving.
ExperimentReport run_experiment(std::span<const Driver> portfolio, const GridSpec& grid,
                                const SolverConfig& solver_cfg,
                                const EstimatorConfig& estimator_cfg,
                                const ExperimentConfig& experiment_cfg, std::uint64_t seed);

// All-zero discounts for the whole horizon; costs are pure expected claims.
ExperimentReport no_incentive_baseline(std::span<const Driver> portfolio, int horizon,
                                       double y_max);

}  // namespace ubi
