#include "ubi/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ubi/parallel.hpp"
#include "ubi/rng.hpp"

namespace ubi {

namespace {

void check_range(const Range& r, const char* name) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi || r.lo < 0.0) {
        throw std::invalid_argument(std::string(name) + ": invalid range");
    }
}

YearRow make_row(std::span<const DriverState> states, double rewards) {
    YearRow row;
    for (const DriverState& s : states) {
        row.expected_claim_cost += s.p * s.y;
        row.mean_claim_prob += s.p;
    }
    row.mean_claim_prob /= static_cast<double>(states.size());
    row.reward_outlay = rewards;
    row.total_loss = row.expected_claim_cost + row.reward_outlay;
    return row;
}

void finish_report(ExperimentReport& report) {
    report.baseline_total_loss = report.per_year.front().expected_claim_cost;
    double mean_subsequent = 0.0;
    for (std::size_t t = 1; t < report.per_year.size(); ++t) {
        mean_subsequent += report.per_year[t].total_loss;
    }
    if (report.per_year.size() > 1 && report.baseline_total_loss > 0.0) {
        mean_subsequent /= static_cast<double>(report.per_year.size() - 1);
        report.reduction_fraction =
            (report.baseline_total_loss - mean_subsequent) / report.baseline_total_loss;
    }
}

}  // namespace

void validate(const GenerationRanges& ranges) {
    check_range(ranges.beta, "beta");
    check_range(ranges.theta, "theta");
    check_range(ranges.premium, "premium");
    check_range(ranges.baseline_p, "baseline_p");
    check_range(ranges.baseline_y, "baseline_y");
    if (ranges.theta.lo <= 0.0 || ranges.theta.hi > 1.0) {
        throw std::invalid_argument("theta range must lie in (0, 1]");
    }
    if (ranges.premium.lo <= 0.0) throw std::invalid_argument("premium range must be > 0");
    if (ranges.baseline_p.hi > 1.0) throw std::invalid_argument("baseline_p range must be <= 1");
}

std::vector<Driver> generate(int n, const GenerationRanges& ranges, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("portfolio size must be >= 1");
    validate(ranges);
    std::vector<Driver> portfolio(n);
    for (int i = 0; i < n; ++i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i), rng_purpose::kGenerate);
        Driver& d = portfolio[i];
        d.params.beta_p = rng.uniform(ranges.beta.lo, ranges.beta.hi);
        d.params.beta_y = rng.uniform(ranges.beta.lo, ranges.beta.hi);
        d.params.theta_p = rng.uniform(ranges.theta.lo, ranges.theta.hi);
        d.params.theta_y = rng.uniform(ranges.theta.lo, ranges.theta.hi);
        d.params.baseline_p = rng.uniform(ranges.baseline_p.lo, ranges.baseline_p.hi);
        d.params.baseline_y = rng.uniform(ranges.baseline_y.lo, ranges.baseline_y.hi);
        d.params.premium = rng.uniform(ranges.premium.lo, ranges.premium.hi);
        d.initial = {d.params.baseline_p, d.params.baseline_y};
    }
    return portfolio;
}

double derive_y_max(std::span<const Driver> portfolio) {
    double top = 0.0;
    for (const Driver& d : portfolio) top = std::max(top, d.params.baseline_y);
    return 1.25 * top;
}

std::vector<ObservationSeries> warmup(std::span<const Driver> portfolio,
                                      const WarmupConfig& cfg, std::uint64_t seed) {
    if (cfg.periods < 1) throw std::invalid_argument("warmup periods must be >= 1");
    if (cfg.y_max <= 0.0) throw std::invalid_argument("warmup y_max must be > 0");
    if (cfg.noise_level < 0.0) throw std::invalid_argument("noise_level must be >= 0");

    std::vector<ObservationSeries> series(portfolio.size());
    for (std::size_t i = 0; i < portfolio.size(); ++i) {
        RngStream discounts(seed, i, rng_purpose::kWarmupDiscount);
        RngStream noise(seed, i, rng_purpose::kObservationNoise);
        const Driver& d = portfolio[i];
        DriverState s = d.initial;
        for (int t = 0; t < cfg.periods; ++t) {
            const double c = discounts.uniform(0.0, cfg.eta);
            s = step(s, d.params, c, cfg.y_max);
            const double p_obs =
                std::clamp(s.p + cfg.noise_level * noise.symmetric(), 0.0, 1.0);
            const double y_obs = std::clamp(s.y + cfg.noise_level * cfg.y_max * noise.symmetric(),
                                            0.0, cfg.y_max);
            series[i].discounts.push_back(c);
            series[i].observed_p.push_back(p_obs);
            series[i].observed_y.push_back(y_obs);
        }
    }
    return series;
}

ExperimentReport run_experiment(std::span<const Driver> portfolio, const GridSpec& grid,
                                const SolverConfig& solver_cfg,
                                const EstimatorConfig& estimator_cfg,
                                const ExperimentConfig& experiment_cfg, std::uint64_t seed) {
    if (portfolio.empty()) throw std::invalid_argument("empty portfolio");
    if (experiment_cfg.horizon < 2) throw std::invalid_argument("horizon must be >= 2");
    const bool estimated = experiment_cfg.mode == ParamMode::kEstimated;
    const int warmup_years = estimated ? experiment_cfg.warmup_periods : 0;
    if (estimated && warmup_years < 2) {
        throw std::invalid_argument("estimated mode needs warmup_periods >= 2");
    }
    const double y_max = experiment_cfg.y_max > 0.0 ? experiment_cfg.y_max
                                                    : derive_y_max(portfolio);
    GridSpec g = grid;
    g.y_max = y_max;

    const int T = experiment_cfg.horizon;
    const std::size_t n = portfolio.size();

    std::vector<DriverState> states(n);
    for (std::size_t i = 0; i < n; ++i) states[i] = portfolio[i].initial;

    ExperimentReport report;
    report.per_year.push_back(make_row(states, 0.0));
    report.per_driver_cost.assign(n, 0.0);

    std::vector<ObservationSeries> observations(n);
    std::vector<Driver> believed(portfolio.begin(), portfolio.end());

    for (int s = 0; s < T; ++s) {
        std::vector<double> year_discounts(n, 0.0);
        YearSolveInfo info;
        info.year = s;
        std::vector<IterationRecord> year_history;

        if (estimated && s < warmup_years) {
            for (std::size_t i = 0; i < n; ++i) {
                RngStream rng(seed, i, rng_purpose::kWarmupDiscount);
                for (int skip = 0; skip < s; ++skip) rng.next_double();
                year_discounts[i] = rng.uniform(0.0, solver_cfg.eta);
            }
        } else {
            if (estimated) {
                // Refit each driver from its accumulated observations; the
                // believed current state is the fitted model rolled through
                // the full discount history.
                parallel_for(n, solver_cfg.threads, [&](std::size_t i) {
                    EstimatorConfig ecfg = estimator_cfg;
                    ecfg.y_max = y_max;
                    const std::uint64_t fit_seed =
                        RngStream(seed, i, rng_purpose::kFitStart).next_u64();
                    const FitResult fr =
                        fit(observations[i], portfolio[i].params.premium, ecfg, fit_seed);
                    believed[i].params = fr.params;
                    const auto path = rollout(fr.initial_state, fr.params,
                                              observations[i].discounts, y_max);
                    believed[i].initial = path.back();
                });
            } else {
                for (std::size_t i = 0; i < n; ++i) believed[i].initial = states[i];
            }
            SolveResult sr = solve(believed, T - s, g, solver_cfg);
            for (std::size_t i = 0; i < n; ++i) year_discounts[i] = sr.schedules[i][0];
            info.solved = true;
            info.converged = sr.converged;
            info.repaired = sr.repaired;
            info.iterations = static_cast<int>(sr.history.size());
            year_history = std::move(sr.history);
        }
        report.solves.push_back(info);
        report.histories.push_back(std::move(year_history));

        double rewards = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = year_discounts[i];
            rewards += c * portfolio[i].params.premium;
            states[i] = step(states[i], portfolio[i].params, c, y_max);
            report.per_driver_cost[i] += c * portfolio[i].params.premium +
                                         states[i].p * states[i].y;
            if (estimated) {
                RngStream noise(seed, i, rng_purpose::kObservationNoise);
                for (int skip = 0; skip < 2 * s; ++skip) noise.next_double();
                const double lvl = experiment_cfg.observation_noise;
                observations[i].discounts.push_back(c);
                observations[i].observed_p.push_back(
                    std::clamp(states[i].p + lvl * noise.symmetric(), 0.0, 1.0));
                observations[i].observed_y.push_back(
                    std::clamp(states[i].y + lvl * y_max * noise.symmetric(), 0.0, y_max));
            }
        }
        report.per_year.back().reward_outlay = rewards;
        report.per_year.back().total_loss =
            report.per_year.back().expected_claim_cost + rewards;
        if (s + 1 < T) report.per_year.push_back(make_row(states, 0.0));
    }

    report.per_driver_zero_cost.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        report.per_driver_zero_cost[i] =
            zero_discount_cost(portfolio[i].initial, portfolio[i].params, T, y_max);
    }
    finish_report(report);
    return report;
}

ExperimentReport no_incentive_baseline(std::span<const Driver> portfolio, int horizon,
                                       double y_max) {
    if (portfolio.empty()) throw std::invalid_argument("empty portfolio");
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    const double ym = y_max > 0.0 ? y_max : derive_y_max(portfolio);

    std::vector<DriverState> states(portfolio.size());
    for (std::size_t i = 0; i < portfolio.size(); ++i) states[i] = portfolio[i].initial;

    ExperimentReport report;
    report.per_driver_cost.assign(portfolio.size(), 0.0);
    report.per_driver_zero_cost.assign(portfolio.size(), 0.0);
    for (int t = 0; t < horizon; ++t) {
        report.per_year.push_back(make_row(states, 0.0));
        for (std::size_t i = 0; i < portfolio.size(); ++i) {
            states[i] = step(states[i], portfolio[i].params, 0.0, ym);
            report.per_driver_cost[i] += states[i].p * states[i].y;
            report.per_driver_zero_cost[i] = report.per_driver_cost[i];
        }
    }
    finish_report(report);
    return report;
}

}  // namespace ubi
