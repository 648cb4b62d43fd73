#include "ubi/dual.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ubi/parallel.hpp"

namespace ubi {

void validate(const SolverConfig& cfg) {
    if (!std::isfinite(cfg.budget) || cfg.budget < 0.0) {
        throw std::invalid_argument("budget must be finite and >= 0");
    }
    if (cfg.eta <= 0.0 || cfg.eta > 1.0) throw std::invalid_argument("eta must be in (0, 1]");
    if (cfg.eps_lambda <= 0.0) throw std::invalid_argument("eps_lambda must be > 0");
    if (cfg.eps_feasibility < 0.0 || cfg.eps_feasibility_fraction < 0.0) {
        throw std::invalid_argument("feasibility tolerances must be >= 0");
    }
    if (cfg.max_outer_iterations < 1) {
        throw std::invalid_argument("max_outer_iterations must be >= 1");
    }
    if (cfg.constant_phase_iterations < 0) {
        throw std::invalid_argument("constant_phase_iterations must be >= 0");
    }
    if (cfg.decay_exponent <= 0.0) throw std::invalid_argument("decay_exponent must be > 0");
}

double resolved_eps_feasibility(const SolverConfig& cfg) {
    double eps = cfg.eps_feasibility > 0.0 ? cfg.eps_feasibility
                                           : cfg.eps_feasibility_fraction * cfg.budget;
    return std::max(eps, 1e-9);
}

double resolved_alpha0(const SolverConfig& cfg, std::span<const Driver> portfolio) {
    if (cfg.alpha0 > 0.0) return cfg.alpha0;
    double max_premium = 0.0;
    for (const Driver& d : portfolio) max_premium = std::max(max_premium, d.params.premium);
    return 1.0 / (static_cast<double>(portfolio.size()) * max_premium * cfg.eta);
}

DualEvaluation evaluate_dual(std::span<const Driver> portfolio, const DualState& dual,
                             const GridSpec& grid, const SolverConfig& cfg) {
    if (portfolio.empty()) throw std::invalid_argument("empty portfolio");
    const int M = static_cast<int>(dual.lambdas.size());

    std::vector<RolloutOutcome> outcomes(portfolio.size());
    parallel_for(portfolio.size(), cfg.threads, [&](std::size_t i) {
        const Driver& d = portfolio[i];
        if (cfg.exact_subproblems) {
            outcomes[i] = exact_greedy_rollout(d.params, dual.lambdas, d.initial, grid);
        } else {
            const ValueTable table = backward_induction(d.params, dual.lambdas, grid);
            outcomes[i] = greedy_rollout(table, d.initial, d.params);
        }
    });

    DualEvaluation ev;
    ev.usage.assign(M, 0.0);
    ev.schedules.reserve(portfolio.size());
    for (std::size_t i = 0; i < portfolio.size(); ++i) {
        for (int t = 0; t < M; ++t) {
            ev.usage[t] += outcomes[i].schedule[t] * portfolio[i].params.premium;
        }
        ev.dual_value += outcomes[i].penalized_cost;
        ev.realized_cost += outcomes[i].realized_cost;
        ev.schedules.push_back(std::move(outcomes[i].schedule));
    }
    for (double l : dual.lambdas) ev.dual_value -= l * cfg.budget;
    return ev;
}

DualState subgradient_step(const DualState& dual, std::span<const double> usage,
                           const SolverConfig& cfg, std::span<const Driver> portfolio) {
    if (usage.size() != dual.lambdas.size()) {
        throw std::invalid_argument("usage length does not match lambdas");
    }
    const double alpha0 = resolved_alpha0(cfg, portfolio);
    const int decayed = std::max(0, dual.iteration - dual.decay_anchor);
    const double alpha = alpha0 / std::pow(1.0 + decayed, cfg.decay_exponent);

    DualState next = dual;
    for (std::size_t t = 0; t < usage.size(); ++t) {
        next.lambdas[t] = std::max(0.0, dual.lambdas[t] + alpha * (usage[t] - cfg.budget));
    }
    next.iteration = dual.iteration + 1;
    return next;
}

namespace {

double max_violation(std::span<const double> usage, double budget) {
    double v = -std::numeric_limits<double>::infinity();
    for (double u : usage) v = std::max(v, u - budget);
    return v;
}

// Greedy repair: per violating period, zero the largest spenders (partial
// reduction for the last one) until usage fits the budget. Downstream usage
// is schedule-determined, so periods repair independently.
void repair_schedules(std::vector<DiscountSchedule>& schedules,
                      std::span<const Driver> portfolio, double budget) {
    if (schedules.empty()) return;
    const int M = static_cast<int>(schedules.front().size());
    for (int t = 0; t < M; ++t) {
        double usage = 0.0;
        for (std::size_t i = 0; i < schedules.size(); ++i) {
            usage += schedules[i][t] * portfolio[i].params.premium;
        }
        if (usage <= budget) continue;
        std::vector<std::size_t> order(schedules.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double sa = schedules[a][t] * portfolio[a].params.premium;
            const double sb = schedules[b][t] * portfolio[b].params.premium;
            if (sa != sb) return sa > sb;
            return a < b;
        });
        for (std::size_t i : order) {
            if (usage <= budget) break;
            const double spend = schedules[i][t] * portfolio[i].params.premium;
            const double excess = usage - budget;
            if (spend >= excess) {
                schedules[i][t] -= excess / portfolio[i].params.premium;
                schedules[i][t] = std::max(0.0, schedules[i][t]);
                usage = budget;
            } else {
                schedules[i][t] = 0.0;
                usage -= spend;
            }
        }
    }
}

double schedules_cost(const std::vector<DiscountSchedule>& schedules,
                      std::span<const Driver> portfolio, double y_max) {
    double total = 0.0;
    for (std::size_t i = 0; i < schedules.size(); ++i) {
        DriverState s = portfolio[i].initial;
        for (double c : schedules[i]) {
            s = step(s, portfolio[i].params, c, y_max);
            total += portfolio[i].params.premium * c + s.p * s.y;
        }
    }
    return total;
}

}  // namespace

SolveResult solve(std::span<const Driver> portfolio, int periods, const GridSpec& grid,
                  const SolverConfig& cfg) {
    if (portfolio.empty()) throw std::invalid_argument("empty portfolio");
    if (periods < 1) throw std::invalid_argument("periods must be >= 1");
    validate(cfg);
    validate(grid);

    const double eps_feas = resolved_eps_feasibility(cfg);
    SolveResult result;
    result.best_dual_value = -std::numeric_limits<double>::infinity();

    DualState dual;
    dual.lambdas.assign(periods, 0.0);
    bool have_feasible = false;
    double best_cost = std::numeric_limits<double>::infinity();
    DualEvaluation last_ev;

    const auto start = std::chrono::steady_clock::now();
    for (int k = 0; k < cfg.max_outer_iterations; ++k) {
        DualEvaluation ev = evaluate_dual(portfolio, dual, grid, cfg);
        dual.usage = ev.usage;
        dual.dual_value = ev.dual_value;
        result.best_dual_value = std::max(result.best_dual_value, ev.dual_value);

        const double viol = max_violation(ev.usage, cfg.budget);
        const bool feasible = viol <= eps_feas;
        if (feasible) {
            if (!have_feasible) {
                have_feasible = true;
                dual.decay_anchor = k;  // switch to the decaying phase
            }
            if (ev.realized_cost < best_cost) {
                best_cost = ev.realized_cost;
                result.schedules = ev.schedules;
                result.realized_cost = ev.realized_cost;
            }
        } else if (!have_feasible) {
            // Constant-step phase until feasibility, but bounded: persistent
            // infeasibility means the discrete subproblem responses cannot
            // tile the budget, and only shrinking steps settle the cycling.
            dual.decay_anchor = std::min(k, cfg.constant_phase_iterations);
        }

        DualState next = subgradient_step(dual, ev.usage, cfg, portfolio);
        double delta = 0.0;
        for (std::size_t t = 0; t < dual.lambdas.size(); ++t) {
            delta = std::max(delta, std::abs(next.lambdas[t] - dual.lambdas[t]));
        }

        const double wall =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        result.history.push_back({k, ev.dual_value, viol, delta, wall});

        // Approximate complementary slackness: every period either has a
        // near-zero multiplier or a near-binding budget.
        bool complementary = true;
        for (std::size_t t = 0; t < next.lambdas.size(); ++t) {
            if (next.lambdas[t] > cfg.eps_lambda && cfg.budget - ev.usage[t] > eps_feas) {
                complementary = false;
                break;
            }
        }

        last_ev = std::move(ev);
        dual = std::move(next);
        if (feasible && complementary && delta <= cfg.eps_lambda) {
            result.converged = true;
            break;
        }
    }

    if (!have_feasible) {
        result.schedules = last_ev.schedules;
        repair_schedules(result.schedules, portfolio, cfg.budget);
        result.realized_cost = schedules_cost(result.schedules, portfolio, grid.y_max);
        result.repaired = true;
        result.converged = false;
    }
    result.dual = dual;
    return result;
}

}  // namespace ubi
