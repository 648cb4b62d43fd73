#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ubi/dual.hpp"
#include "ubi/estimator.hpp"
#include "ubi/portfolio.hpp"

namespace ubi {

struct ScenarioConfig {
    int horizon = 8;  // T
    int start = 0;    // s; solves cover {start..horizon}
    double eta = 0.2;
    double y_max = 0.0;            // 0 = auto: 1.25 x the largest baseline_y drawn
    double budget = 0.0;           // absolute per-period budget; 0 = use budget_fraction
    double budget_fraction = 0.03;  // fraction of total portfolio premium per period
};

struct GridConfig {
    int p_nodes = 41;
    int y_nodes = 41;
    int discount_candidates = 21;
    bool refine_policy = false;
};

struct SolverSection {
    double alpha0 = 0.0;  // 0 = auto: 1 / (N * max premium * eta)
    double decay_exponent = 0.5;
    double eps_feasibility = 0.0;  // absolute; 0 = eps_feasibility_fraction * budget
    double eps_feasibility_fraction = 0.01;
    double eps_lambda = 1e-4;
    int max_outer_iterations = 200;
    int constant_phase_iterations = 20;
    bool exact_subproblems = false;
};

struct EstimatorSection {
    double loss_weight = 0.0;  // 0 = auto: 1 / mean(observed_y)
    int multistart_count = 8;
    int max_iterations = 60;
    double tolerance = 1e-11;
    double beta_max = 5.0;
    double theta_min = 1e-3;
};

struct GenerationSection {
    int n_drivers = 100;
    GenerationRanges ranges;
};

struct ExperimentSection {
    std::string mode = "oracle-params";  // or "estimated-params"
    int warmup_periods = 2;
    double observation_noise = 0.0;
};

struct GapSection {
    int instances = 50;
    int max_drivers = 3;
    int max_periods = 3;
    int max_candidates = 5;
    std::vector<int> replications = {1, 2, 3};
};

// The whole run configuration; every field has a documented default and
// unknown keys are rejected on load.
struct RunConfig {
    std::uint64_t seed = 1;
    int threads = 0;  // 0 = all cores
    std::string out_dir;
    ScenarioConfig scenario;
    GridConfig grid;
    SolverSection solver;
    EstimatorSection estimator;
    GenerationSection generation;
    ExperimentSection experiment;
    GapSection gap;
};

RunConfig default_run_config();
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& json_text);
std::string run_config_to_json(const RunConfig& cfg);

// Resolution helpers: fill the auto fields once the portfolio is known.
double resolve_y_max(const RunConfig& cfg, std::span<const Driver> portfolio);
double resolve_budget(const RunConfig& cfg, std::span<const Driver> portfolio);
GridSpec make_grid_spec(const RunConfig& cfg, double y_max);
SolverConfig make_solver_config(const RunConfig& cfg, double budget);
EstimatorConfig make_estimator_config(const RunConfig& cfg, double y_max);

}  // namespace ubi
