#include "ubi/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "ubi/csvio.hpp"
#include "ubi/dual.hpp"
#include "ubi/gapcheck.hpp"
#include "ubi/parallel.hpp"
#include "ubi/rng.hpp"

namespace ubi {

namespace {

using nlohmann::json;

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
}

// Echo the configuration with the portfolio-dependent fields resolved.
void write_config_echo(const RunConfig& cfg, const std::filesystem::path& out_dir,
                       double budget = 0.0, double y_max = 0.0) {
    RunConfig resolved = cfg;
    if (budget > 0.0) resolved.scenario.budget = budget;
    if (y_max > 0.0) resolved.scenario.y_max = y_max;
    write_text(out_dir / "resolved_config.json", run_config_to_json(resolved));
}

ParamMode parse_mode(const std::string& mode) {
    if (mode == "oracle-params") return ParamMode::kOracle;
    if (mode == "estimated-params") return ParamMode::kEstimated;
    throw std::runtime_error("unknown experiment mode: " + mode);
}

}  // namespace

void write_portfolio_csv(const std::filesystem::path& path, std::span<const Driver> portfolio) {
    CsvTable table;
    table.header = {"id",         "beta_p",     "beta_y",  "theta_p", "theta_y",
                    "baseline_p", "baseline_y", "premium", "p0",      "y0"};
    for (std::size_t i = 0; i < portfolio.size(); ++i) {
        const DriverParams& d = portfolio[i].params;
        table.rows.push_back({std::to_string(i), format_double(d.beta_p),
                              format_double(d.beta_y), format_double(d.theta_p),
                              format_double(d.theta_y), format_double(d.baseline_p),
                              format_double(d.baseline_y), format_double(d.premium),
                              format_double(portfolio[i].initial.p),
                              format_double(portfolio[i].initial.y)});
    }
    write_csv(path, table);
}

std::vector<Driver> read_portfolio_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path, 10);
    std::vector<Driver> portfolio;
    portfolio.reserve(table.rows.size());
    std::size_t line = 1;
    for (const auto& row : table.rows) {
        ++line;
        Driver d;
        d.params.beta_p = parse_double(row[1], path, line);
        d.params.beta_y = parse_double(row[2], path, line);
        d.params.theta_p = parse_double(row[3], path, line);
        d.params.theta_y = parse_double(row[4], path, line);
        d.params.baseline_p = parse_double(row[5], path, line);
        d.params.baseline_y = parse_double(row[6], path, line);
        d.params.premium = parse_double(row[7], path, line);
        d.initial.p = parse_double(row[8], path, line);
        d.initial.y = parse_double(row[9], path, line);
        validate(d.params);
        portfolio.push_back(d);
    }
    if (portfolio.empty()) throw std::runtime_error(path.string() + ": no drivers");
    return portfolio;
}

void write_observations_csv(const std::filesystem::path& path, const ObservationsFile& obs) {
    CsvTable table;
    table.header = {"driver_id", "period", "discount", "observed_p", "observed_y", "premium"};
    for (std::size_t i = 0; i < obs.series.size(); ++i) {
        const ObservationSeries& s = obs.series[i];
        for (std::size_t t = 0; t < s.discounts.size(); ++t) {
            table.rows.push_back({std::to_string(obs.ids[i]), std::to_string(t),
                                  format_double(s.discounts[t]), format_double(s.observed_p[t]),
                                  format_double(s.observed_y[t]),
                                  format_double(obs.premiums[i])});
        }
    }
    write_csv(path, table);
}

ObservationsFile read_observations_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path, 6);
    if (table.rows.empty()) throw std::runtime_error(path.string() + ": no observations");
    std::map<long long, std::size_t> index;
    ObservationsFile obs;
    std::size_t line = 1;
    for (const auto& row : table.rows) {
        ++line;
        const long long id = parse_int(row[0], path, line);
        auto it = index.find(id);
        if (it == index.end()) {
            it = index.emplace(id, obs.series.size()).first;
            obs.ids.push_back(id);
            obs.series.emplace_back();
            obs.premiums.push_back(parse_double(row[5], path, line));
        }
        ObservationSeries& s = obs.series[it->second];
        const long long period = parse_int(row[1], path, line);
        if (period != static_cast<long long>(s.discounts.size())) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line) +
                                     ": periods must be contiguous from 0 per driver");
        }
        s.discounts.push_back(parse_double(row[2], path, line));
        s.observed_p.push_back(parse_double(row[3], path, line));
        s.observed_y.push_back(parse_double(row[4], path, line));
    }
    return obs;
}

int cmd_generate(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    const auto portfolio = generate(cfg.generation.n_drivers, cfg.generation.ranges, cfg.seed);
    write_portfolio_csv(out_dir / "portfolio.csv", portfolio);
    write_config_echo(cfg, out_dir, resolve_budget(cfg, portfolio),
                      resolve_y_max(cfg, portfolio));
    std::cout << "wrote " << (out_dir / "portfolio.csv").string() << " ("
              << portfolio.size() << " drivers)\n";
    return 0;
}

int cmd_estimate(const RunConfig& cfg, const std::filesystem::path& observations_path,
                 const std::filesystem::path& out_dir) {
    const ObservationsFile obs = read_observations_csv(observations_path);
    double y_max = cfg.scenario.y_max;
    if (y_max <= 0.0) {
        double top = 0.0;
        for (const auto& s : obs.series) {
            for (double y : s.observed_y) top = std::max(top, y);
        }
        y_max = 1.25 * std::max(top, 1.0);
    }
    const EstimatorConfig ecfg = make_estimator_config(cfg, y_max);

    std::vector<FitResult> fits(obs.series.size());
    parallel_for(obs.series.size(), cfg.threads, [&](std::size_t i) {
        const std::uint64_t fit_seed =
            RngStream(cfg.seed, static_cast<std::uint64_t>(obs.ids[i]), rng_purpose::kFitStart)
                .next_u64();
        fits[i] = fit(obs.series[i], obs.premiums[i], ecfg, fit_seed);
    });

    CsvTable table;
    table.header = {"id",         "beta_p",     "beta_y",  "theta_p",   "theta_y",
                    "baseline_p", "baseline_y", "premium", "p0",        "y0",
                    "objective",  "low_excitation"};
    double mean_objective = 0.0;
    int low_excitation = 0;
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const FitResult& f = fits[i];
        table.rows.push_back(
            {std::to_string(obs.ids[i]), format_double(f.params.beta_p),
             format_double(f.params.beta_y), format_double(f.params.theta_p),
             format_double(f.params.theta_y), format_double(f.params.baseline_p),
             format_double(f.params.baseline_y), format_double(f.params.premium),
             format_double(f.initial_state.p), format_double(f.initial_state.y),
             format_double(f.objective), f.low_excitation ? "1" : "0"});
        mean_objective += f.objective;
        low_excitation += f.low_excitation ? 1 : 0;
    }
    mean_objective /= static_cast<double>(fits.size());
    write_csv(out_dir / "fits.csv", table);

    json summary;
    summary["drivers"] = fits.size();
    summary["mean_objective"] = mean_objective;
    summary["low_excitation_count"] = low_excitation;
    write_text(out_dir / "estimate_summary.json", summary.dump(2) + "\n");
    write_config_echo(cfg, out_dir, 0.0, y_max);
    std::cout << "fitted " << fits.size() << " drivers, mean objective "
              << format_double(mean_objective) << ", low-excitation " << low_excitation << "\n";
    return 0;
}

int cmd_optimize(const RunConfig& cfg, const std::filesystem::path& portfolio_path,
                 const std::filesystem::path& out_dir) {
    const auto portfolio = read_portfolio_csv(portfolio_path);
    const double y_max = resolve_y_max(cfg, portfolio);
    const double budget = resolve_budget(cfg, portfolio);
    const GridSpec grid = make_grid_spec(cfg, y_max);
    const SolverConfig solver_cfg = make_solver_config(cfg, budget);
    const int periods = cfg.scenario.horizon - cfg.scenario.start;

    const SolveResult result = solve(portfolio, periods, grid, solver_cfg);

    CsvTable schedules;
    schedules.header = {"driver_id", "period", "discount"};
    for (std::size_t i = 0; i < result.schedules.size(); ++i) {
        for (std::size_t t = 0; t < result.schedules[i].size(); ++t) {
            schedules.rows.push_back({std::to_string(i),
                                      std::to_string(cfg.scenario.start + t),
                                      format_double(result.schedules[i][t])});
        }
    }
    write_csv(out_dir / "schedules.csv", schedules);

    CsvTable history;
    history.header = {"iteration", "dual_value", "max_violation", "lambda_delta", "wall_ms"};
    for (const IterationRecord& r : result.history) {
        history.rows.push_back({std::to_string(r.iteration), format_double(r.dual_value),
                                format_double(r.max_violation), format_double(r.lambda_delta),
                                format_double(r.wall_ms)});
    }
    write_csv(out_dir / "dual_history.csv", history);

    CsvTable lambdas;
    lambdas.header = {"period", "lambda"};
    for (std::size_t t = 0; t < result.dual.lambdas.size(); ++t) {
        lambdas.rows.push_back({std::to_string(cfg.scenario.start + t),
                                format_double(result.dual.lambdas[t])});
    }
    write_csv(out_dir / "lambdas.csv", lambdas);
    write_config_echo(cfg, out_dir, budget, y_max);

    std::cout << "optimize: " << (result.converged ? "converged" : "not converged")
              << (result.repaired ? " (repaired)" : "") << ", realized cost "
              << format_double(result.realized_cost) << ", iterations "
              << result.history.size() << "\n";
    if (result.converged) return 0;
    return result.repaired ? 3 : 2;
}

int cmd_experiment(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    const auto portfolio = generate(cfg.generation.n_drivers, cfg.generation.ranges, cfg.seed);
    const double y_max = resolve_y_max(cfg, portfolio);
    const double budget = resolve_budget(cfg, portfolio);
    const GridSpec grid = make_grid_spec(cfg, y_max);
    const SolverConfig solver_cfg = make_solver_config(cfg, budget);
    const EstimatorConfig estimator_cfg = make_estimator_config(cfg, y_max);

    ExperimentConfig ecfg;
    ecfg.horizon = cfg.scenario.horizon;
    ecfg.mode = parse_mode(cfg.experiment.mode);
    ecfg.warmup_periods = cfg.experiment.warmup_periods;
    ecfg.observation_noise = cfg.experiment.observation_noise;
    ecfg.y_max = y_max;

    const ExperimentReport report =
        run_experiment(portfolio, grid, solver_cfg, estimator_cfg, ecfg, cfg.seed);

    CsvTable rows;
    rows.header = {"year", "expected_claim_cost", "reward_outlay", "total_loss",
                   "mean_claim_prob"};
    for (std::size_t t = 0; t < report.per_year.size(); ++t) {
        const YearRow& r = report.per_year[t];
        rows.rows.push_back({std::to_string(t), format_double(r.expected_claim_cost),
                             format_double(r.reward_outlay), format_double(r.total_loss),
                             format_double(r.mean_claim_prob)});
    }
    write_csv(out_dir / "experiment_report.csv", rows);

    CsvTable probs;
    probs.header = {"year", "mean_claim_prob"};
    for (std::size_t t = 0; t < report.per_year.size(); ++t) {
        probs.rows.push_back(
            {std::to_string(t), format_double(report.per_year[t].mean_claim_prob)});
    }
    write_csv(out_dir / "claim_probability.csv", probs);

    RunConfig resolved = cfg;
    resolved.scenario.budget = budget;
    resolved.scenario.y_max = y_max;
    json record;
    record["config"] = json::parse(run_config_to_json(resolved));
    record["baseline_total_loss"] = report.baseline_total_loss;
    record["reduction_fraction"] = report.reduction_fraction;
    json years = json::array();
    for (std::size_t t = 0; t < report.per_year.size(); ++t) {
        const YearRow& r = report.per_year[t];
        years.push_back({{"year", t},
                         {"expected_claim_cost", r.expected_claim_cost},
                         {"reward_outlay", r.reward_outlay},
                         {"total_loss", r.total_loss},
                         {"mean_claim_prob", r.mean_claim_prob}});
    }
    record["per_year"] = years;
    json solves = json::array();
    for (std::size_t i = 0; i < report.solves.size(); ++i) {
        const YearSolveInfo& s = report.solves[i];
        json entry = {{"year", s.year},
                      {"solved", s.solved},
                      {"converged", s.converged},
                      {"repaired", s.repaired},
                      {"iterations", s.iterations}};
        json iters = json::array();
        for (const IterationRecord& r : report.histories[i]) {
            // wall time deliberately omitted: reruns must be byte-identical
            iters.push_back({{"iteration", r.iteration},
                             {"dual_value", r.dual_value},
                             {"max_violation", r.max_violation},
                             {"lambda_delta", r.lambda_delta}});
        }
        entry["history"] = iters;
        solves.push_back(entry);
    }
    record["solves"] = solves;
    write_text(out_dir / "experiment.json", record.dump(2) + "\n");
    write_config_echo(cfg, out_dir, budget, y_max);

    std::cout << "experiment: baseline " << format_double(report.baseline_total_loss)
              << ", reduction " << format_double(report.reduction_fraction) << "\n";
    return 0;
}

int cmd_gap(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    CsvTable table;
    table.header = {"instance", "n", "periods", "candidates", "primal_optimum", "dual_value",
                    "gap", "bound"};
    json records = json::array();
    for (int i = 0; i < cfg.gap.instances; ++i) {
        const GapInstance inst =
            random_gap_instance(cfg.seed, static_cast<std::uint64_t>(i), cfg.gap.max_drivers,
                                cfg.gap.max_periods, cfg.gap.max_candidates, cfg.scenario.eta);
        GridSpec grid = make_grid_spec(cfg, derive_y_max(inst.drivers));
        SolverConfig solver_cfg = make_solver_config(cfg, inst.budget);
        std::vector<GapReport> reports;
        try {
            reports = measure_gap(inst, cfg.gap.replications, grid, solver_cfg);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("gap instance " + std::to_string(i) + ": " + e.what());
        }
        for (const GapReport& r : reports) {
            table.rows.push_back({std::to_string(i), std::to_string(r.n),
                                  std::to_string(inst.periods), std::to_string(inst.candidates),
                                  format_double(r.primal_optimum), format_double(r.dual_value),
                                  format_double(r.gap), format_double(r.bound)});
            records.push_back({{"instance", i},
                               {"n", r.n},
                               {"periods", inst.periods},
                               {"candidates", inst.candidates},
                               {"primal_optimum", r.primal_optimum},
                               {"dual_value", r.dual_value},
                               {"gap", r.gap},
                               {"bound", r.bound}});
        }
    }
    write_csv(out_dir / "gap_reports.csv", table);
    write_text(out_dir / "gap_reports.json", records.dump(2) + "\n");
    write_config_echo(cfg, out_dir);
    std::cout << "gap: " << table.rows.size() << " reports over " << cfg.gap.instances
              << " instances\n";
    return 0;
}

}  // namespace ubi
