#include "ubi/gapcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ubi/dp.hpp"
#include "ubi/rng.hpp"

namespace ubi {

namespace {

struct DriverOption {
    double cost = 0.0;
    std::vector<double> usage;  // per period
    std::vector<double> schedule;
};

std::vector<DriverOption> enumerate_driver(const Driver& d, int periods,
                                           const std::vector<double>& cands, double y_max) {
    const int K = static_cast<int>(cands.size());
    std::vector<DriverOption> options;
    std::vector<int> idx(periods, 0);
    while (true) {
        DriverOption opt;
        opt.usage.resize(periods);
        opt.schedule.resize(periods);
        DriverState s = d.initial;
        for (int t = 0; t < periods; ++t) {
            const double c = cands[idx[t]];
            s = step(s, d.params, c, y_max);
            opt.cost += d.params.premium * c + s.p * s.y;
            opt.usage[t] = c * d.params.premium;
            opt.schedule[t] = c;
        }
        options.push_back(std::move(opt));
        int t = periods - 1;
        while (t >= 0 && ++idx[t] == K) idx[t--] = 0;
        if (t < 0) break;
    }
    return options;
}

}  // namespace

ExhaustiveResult exhaustive_primal(std::span<const Driver> portfolio, int periods,
                                   const GridSpec& grid, double budget) {
    if (portfolio.empty()) throw std::invalid_argument("empty portfolio");
    if (periods < 1) throw std::invalid_argument("periods must be >= 1");
    validate(grid);
    const double bits = static_cast<double>(portfolio.size()) * periods *
                        std::log2(static_cast<double>(grid.discount_candidates));
    if (bits > 24.000001) {
        throw std::invalid_argument("exhaustive search space exceeds the 24-bit cap");
    }

    const auto cands = discount_candidates(grid);
    const std::size_t n = portfolio.size();
    std::vector<std::vector<DriverOption>> options(n);
    std::vector<double> min_remaining(n + 1, 0.0);  // lower bound on the tail cost
    for (std::size_t i = 0; i < n; ++i) {
        options[i] = enumerate_driver(portfolio[i], periods, cands, grid.y_max);
    }
    for (std::size_t i = n; i-- > 0;) {
        double lo = std::numeric_limits<double>::infinity();
        for (const DriverOption& o : options[i]) lo = std::min(lo, o.cost);
        min_remaining[i] = min_remaining[i + 1] + lo;
    }

    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<const DriverOption*> best(n, nullptr);
    std::vector<const DriverOption*> current(n, nullptr);
    std::vector<double> usage(periods, 0.0);

    auto dfs = [&](auto&& self, std::size_t depth, double cost) -> void {
        if (depth == n) {
            if (cost < best_cost) {
                best_cost = cost;
                best = current;
            }
            return;
        }
        for (const DriverOption& opt : options[depth]) {
            if (cost + opt.cost + min_remaining[depth + 1] >= best_cost) continue;
            bool fits = true;
            for (int t = 0; t < periods; ++t) {
                if (usage[t] + opt.usage[t] > budget + 1e-9) {
                    fits = false;
                    break;
                }
            }
            if (!fits) continue;
            for (int t = 0; t < periods; ++t) usage[t] += opt.usage[t];
            current[depth] = &opt;
            self(self, depth + 1, cost + opt.cost);
            for (int t = 0; t < periods; ++t) usage[t] -= opt.usage[t];
        }
    };
    dfs(dfs, 0, 0.0);

    if (!std::isfinite(best_cost)) {
        throw std::runtime_error("exhaustive search found no feasible schedule");
    }
    ExhaustiveResult result;
    result.cost = best_cost;
    result.schedules.reserve(n);
    for (std::size_t i = 0; i < n; ++i) result.schedules.push_back(best[i]->schedule);
    return result;
}

std::vector<GapReport> measure_gap(const GapInstance& base, std::span<const int> replications,
                                   const GridSpec& grid, SolverConfig solver_cfg) {
    if (base.drivers.empty()) throw std::invalid_argument("empty base instance");
    GridSpec g = grid;
    g.discount_candidates = base.candidates;
    g.refine_policy = false;  // identical action sets on both sides

    solver_cfg.exact_subproblems = true;
    solver_cfg.eta = g.eta;
    solver_cfg.eps_feasibility = 1e-9;

    double max_premium = 0.0;
    for (const Driver& d : base.drivers) {
        max_premium = std::max(max_premium, d.params.premium);
    }
    const double bound = (base.periods + 1) * g.y_max + max_premium;

    std::vector<GapReport> reports;
    for (int n : replications) {
        if (n < 1) throw std::invalid_argument("replication count must be >= 1");
        std::vector<Driver> replicated;
        replicated.reserve(base.drivers.size() * n);
        for (int r = 0; r < n; ++r) {
            replicated.insert(replicated.end(), base.drivers.begin(), base.drivers.end());
        }
        SolverConfig cfg = solver_cfg;
        cfg.budget = base.budget * n;

        const ExhaustiveResult primal =
            exhaustive_primal(replicated, base.periods, g, cfg.budget);
        const SolveResult dual = solve(replicated, base.periods, g, cfg);

        GapReport report;
        report.n = static_cast<int>(replicated.size());
        report.primal_optimum = primal.cost;
        report.dual_value = dual.best_dual_value;
        report.gap = primal.cost - dual.best_dual_value;
        report.bound = bound;
        reports.push_back(report);
    }
    return reports;
}

GapInstance random_gap_instance(std::uint64_t seed, std::uint64_t index, int max_drivers,
                                int max_periods, int max_candidates, double eta) {
    if (max_drivers < 1 || max_periods < 1 || max_candidates < 2) {
        throw std::invalid_argument("invalid gap instance caps");
    }
    RngStream rng(seed, index, rng_purpose::kGapInstance);
    auto uniform_int = [&rng](int lo, int hi) {
        const int v = lo + static_cast<int>(rng.next_double() * (hi - lo + 1));
        return std::min(v, hi);
    };
    GapInstance inst;
    int n = uniform_int(1, max_drivers);
    inst.periods = uniform_int(std::min(2, max_periods), max_periods);
    inst.candidates = uniform_int(3, std::max(3, max_candidates));
    while (n > 1 &&
           n * inst.periods * std::log2(static_cast<double>(inst.candidates)) > 24.0) {
        --n;  // keep the instance inside the exhaustive cap
    }

    double total_premium = 0.0;
    for (int i = 0; i < n; ++i) {
        Driver d;
        d.params.beta_p = rng.uniform(1.0, 3.0);
        d.params.beta_y = rng.uniform(1.0, 3.0);
        d.params.theta_p = rng.uniform(0.1, 0.7);
        d.params.theta_y = rng.uniform(0.1, 0.7);
        d.params.baseline_p = rng.uniform(0.02, 0.08);
        d.params.baseline_y = rng.uniform(2000.0, 8000.0);
        d.params.premium = rng.uniform(600.0, 1000.0);
        d.initial = {d.params.baseline_p, d.params.baseline_y};
        total_premium += d.params.premium;
        inst.drivers.push_back(d);
    }
    // A budget that binds against the candidate grid without being degenerate.
    inst.budget = rng.uniform(0.12, 0.48) * eta * total_premium;
    return inst;
}

}  // namespace ubi
