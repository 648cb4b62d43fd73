#include "ubi/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace ubi {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) {
            throw std::runtime_error("config: unknown key '" + where + key + "'");
        }
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

void read_range(const json& obj, const char* key, Range& out, const std::string& where) {
    if (!obj.contains(key)) return;
    const json& arr = obj.at(key);
    if (!arr.is_array() || arr.size() != 2) {
        throw std::runtime_error("config: '" + where + key + "' must be [lo, hi]");
    }
    out.lo = arr[0].get<double>();
    out.hi = arr[1].get<double>();
}

}  // namespace

RunConfig default_run_config() { return RunConfig{}; }

RunConfig parse_run_config(const std::string& json_text) {
    json root = json::parse(json_text);
    if (!root.is_object()) throw std::runtime_error("config: top level must be an object");
    reject_unknown(root,
                   {"seed", "threads", "out_dir", "scenario", "grid", "solver", "estimator",
                    "generation", "experiment", "gap"},
                   "");

    RunConfig cfg;
    read(root, "seed", cfg.seed);
    read(root, "threads", cfg.threads);
    read(root, "out_dir", cfg.out_dir);

    if (root.contains("scenario")) {
        const json& s = root["scenario"];
        reject_unknown(s, {"horizon", "start", "eta", "y_max", "budget", "budget_fraction"},
                       "scenario.");
        read(s, "horizon", cfg.scenario.horizon);
        read(s, "start", cfg.scenario.start);
        read(s, "eta", cfg.scenario.eta);
        read(s, "y_max", cfg.scenario.y_max);
        read(s, "budget", cfg.scenario.budget);
        read(s, "budget_fraction", cfg.scenario.budget_fraction);
    }
    if (root.contains("grid")) {
        const json& g = root["grid"];
        reject_unknown(g, {"p_nodes", "y_nodes", "discount_candidates", "refine_policy"},
                       "grid.");
        read(g, "p_nodes", cfg.grid.p_nodes);
        read(g, "y_nodes", cfg.grid.y_nodes);
        read(g, "discount_candidates", cfg.grid.discount_candidates);
        read(g, "refine_policy", cfg.grid.refine_policy);
    }
    if (root.contains("solver")) {
        const json& s = root["solver"];
        reject_unknown(s,
                       {"alpha0", "decay_exponent", "eps_feasibility",
                        "eps_feasibility_fraction", "eps_lambda", "max_outer_iterations",
                        "constant_phase_iterations", "exact_subproblems"},
                       "solver.");
        read(s, "alpha0", cfg.solver.alpha0);
        read(s, "decay_exponent", cfg.solver.decay_exponent);
        read(s, "eps_feasibility", cfg.solver.eps_feasibility);
        read(s, "eps_feasibility_fraction", cfg.solver.eps_feasibility_fraction);
        read(s, "eps_lambda", cfg.solver.eps_lambda);
        read(s, "max_outer_iterations", cfg.solver.max_outer_iterations);
        read(s, "constant_phase_iterations", cfg.solver.constant_phase_iterations);
        read(s, "exact_subproblems", cfg.solver.exact_subproblems);
    }
    if (root.contains("estimator")) {
        const json& e = root["estimator"];
        reject_unknown(e,
                       {"loss_weight", "multistart_count", "max_iterations", "tolerance",
                        "beta_max", "theta_min"},
                       "estimator.");
        read(e, "loss_weight", cfg.estimator.loss_weight);
        read(e, "multistart_count", cfg.estimator.multistart_count);
        read(e, "max_iterations", cfg.estimator.max_iterations);
        read(e, "tolerance", cfg.estimator.tolerance);
        read(e, "beta_max", cfg.estimator.beta_max);
        read(e, "theta_min", cfg.estimator.theta_min);
    }
    if (root.contains("generation")) {
        const json& g = root["generation"];
        reject_unknown(g, {"n_drivers", "beta", "theta", "premium", "baseline_p", "baseline_y"},
                       "generation.");
        read(g, "n_drivers", cfg.generation.n_drivers);
        read_range(g, "beta", cfg.generation.ranges.beta, "generation.");
        read_range(g, "theta", cfg.generation.ranges.theta, "generation.");
        read_range(g, "premium", cfg.generation.ranges.premium, "generation.");
        read_range(g, "baseline_p", cfg.generation.ranges.baseline_p, "generation.");
        read_range(g, "baseline_y", cfg.generation.ranges.baseline_y, "generation.");
    }
    if (root.contains("experiment")) {
        const json& e = root["experiment"];
        reject_unknown(e, {"mode", "warmup_periods", "observation_noise"}, "experiment.");
        read(e, "mode", cfg.experiment.mode);
        read(e, "warmup_periods", cfg.experiment.warmup_periods);
        read(e, "observation_noise", cfg.experiment.observation_noise);
    }
    if (root.contains("gap")) {
        const json& g = root["gap"];
        reject_unknown(g,
                       {"instances", "max_drivers", "max_periods", "max_candidates",
                        "replications"},
                       "gap.");
        read(g, "instances", cfg.gap.instances);
        read(g, "max_drivers", cfg.gap.max_drivers);
        read(g, "max_periods", cfg.gap.max_periods);
        read(g, "max_candidates", cfg.gap.max_candidates);
        read(g, "replications", cfg.gap.replications);
    }

    // Cross-field validation happens here so a bad file fails on load.
    if (cfg.scenario.horizon < 2) throw std::runtime_error("config: scenario.horizon must be >= 2");
    if (cfg.scenario.start < 0 || cfg.scenario.start >= cfg.scenario.horizon) {
        throw std::runtime_error("config: scenario.start must be in [0, horizon)");
    }
    if (cfg.scenario.eta <= 0.0 || cfg.scenario.eta > 1.0) {
        throw std::runtime_error("config: scenario.eta must be in (0, 1]");
    }
    if (cfg.scenario.budget < 0.0 || cfg.scenario.budget_fraction < 0.0) {
        throw std::runtime_error("config: budget values must be >= 0");
    }
    if (cfg.experiment.mode != "oracle-params" && cfg.experiment.mode != "estimated-params") {
        throw std::runtime_error("config: experiment.mode must be oracle-params or estimated-params");
    }
    if (cfg.generation.n_drivers < 1) {
        throw std::runtime_error("config: generation.n_drivers must be >= 1");
    }
    validate(cfg.generation.ranges);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_run_config(text);
}

std::string run_config_to_json(const RunConfig& cfg) {
    json root;
    root["seed"] = cfg.seed;
    root["threads"] = cfg.threads;
    root["out_dir"] = cfg.out_dir;
    root["scenario"] = {{"horizon", cfg.scenario.horizon},
                        {"start", cfg.scenario.start},
                        {"eta", cfg.scenario.eta},
                        {"y_max", cfg.scenario.y_max},
                        {"budget", cfg.scenario.budget},
                        {"budget_fraction", cfg.scenario.budget_fraction}};
    root["grid"] = {{"p_nodes", cfg.grid.p_nodes},
                    {"y_nodes", cfg.grid.y_nodes},
                    {"discount_candidates", cfg.grid.discount_candidates},
                    {"refine_policy", cfg.grid.refine_policy}};
    root["solver"] = {{"alpha0", cfg.solver.alpha0},
                      {"decay_exponent", cfg.solver.decay_exponent},
                      {"eps_feasibility", cfg.solver.eps_feasibility},
                      {"eps_feasibility_fraction", cfg.solver.eps_feasibility_fraction},
                      {"eps_lambda", cfg.solver.eps_lambda},
                      {"max_outer_iterations", cfg.solver.max_outer_iterations},
                      {"constant_phase_iterations", cfg.solver.constant_phase_iterations},
                      {"exact_subproblems", cfg.solver.exact_subproblems}};
    root["estimator"] = {{"loss_weight", cfg.estimator.loss_weight},
                         {"multistart_count", cfg.estimator.multistart_count},
                         {"max_iterations", cfg.estimator.max_iterations},
                         {"tolerance", cfg.estimator.tolerance},
                         {"beta_max", cfg.estimator.beta_max},
                         {"theta_min", cfg.estimator.theta_min}};
    root["generation"] = {
        {"n_drivers", cfg.generation.n_drivers},
        {"beta", {cfg.generation.ranges.beta.lo, cfg.generation.ranges.beta.hi}},
        {"theta", {cfg.generation.ranges.theta.lo, cfg.generation.ranges.theta.hi}},
        {"premium", {cfg.generation.ranges.premium.lo, cfg.generation.ranges.premium.hi}},
        {"baseline_p",
         {cfg.generation.ranges.baseline_p.lo, cfg.generation.ranges.baseline_p.hi}},
        {"baseline_y",
         {cfg.generation.ranges.baseline_y.lo, cfg.generation.ranges.baseline_y.hi}}};
    root["experiment"] = {{"mode", cfg.experiment.mode},
                          {"warmup_periods", cfg.experiment.warmup_periods},
                          {"observation_noise", cfg.experiment.observation_noise}};
    root["gap"] = {{"instances", cfg.gap.instances},
                   {"max_drivers", cfg.gap.max_drivers},
                   {"max_periods", cfg.gap.max_periods},
                   {"max_candidates", cfg.gap.max_candidates},
                   {"replications", cfg.gap.replications}};
    return root.dump(2) + "\n";
}

double resolve_y_max(const RunConfig& cfg, std::span<const Driver> portfolio) {
    if (cfg.scenario.y_max > 0.0) return cfg.scenario.y_max;
    return derive_y_max(portfolio);
}

double resolve_budget(const RunConfig& cfg, std::span<const Driver> portfolio) {
    if (cfg.scenario.budget > 0.0) return cfg.scenario.budget;
    double total_premium = 0.0;
    for (const Driver& d : portfolio) total_premium += d.params.premium;
    return cfg.scenario.budget_fraction * total_premium;
}

GridSpec make_grid_spec(const RunConfig& cfg, double y_max) {
    GridSpec g;
    g.p_nodes = cfg.grid.p_nodes;
    g.y_nodes = cfg.grid.y_nodes;
    g.discount_candidates = cfg.grid.discount_candidates;
    g.refine_policy = cfg.grid.refine_policy;
    g.eta = cfg.scenario.eta;
    g.y_max = y_max;
    return g;
}

SolverConfig make_solver_config(const RunConfig& cfg, double budget) {
    SolverConfig s;
    s.budget = budget;
    s.eta = cfg.scenario.eta;
    s.alpha0 = cfg.solver.alpha0;
    s.decay_exponent = cfg.solver.decay_exponent;
    s.eps_feasibility = cfg.solver.eps_feasibility;
    s.eps_feasibility_fraction = cfg.solver.eps_feasibility_fraction;
    s.eps_lambda = cfg.solver.eps_lambda;
    s.max_outer_iterations = cfg.solver.max_outer_iterations;
    s.constant_phase_iterations = cfg.solver.constant_phase_iterations;
    s.exact_subproblems = cfg.solver.exact_subproblems;
    s.threads = cfg.threads;
    return s;
}

EstimatorConfig make_estimator_config(const RunConfig& cfg, double y_max) {
    EstimatorConfig e;
    e.loss_weight = cfg.estimator.loss_weight;
    e.multistart_count = cfg.estimator.multistart_count;
    e.max_iterations = cfg.estimator.max_iterations;
    e.tolerance = cfg.estimator.tolerance;
    e.beta_max = cfg.estimator.beta_max;
    e.theta_min = cfg.estimator.theta_min;
    e.y_max = y_max;
    return e;
}

}  // namespace ubi
