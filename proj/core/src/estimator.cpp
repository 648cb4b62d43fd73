#include "ubi/estimator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ubi/rng.hpp"

namespace ubi {

namespace {

constexpr double kGolden = 0.6180339887498949;

// Free parameters in fit order: beta_p, beta_y, theta_p, theta_y, P, Y, p0, y0.
using Candidate = std::array<double, 8>;

struct Boxes {
    Candidate lo;
    Candidate hi;
};

Boxes make_boxes(const EstimatorConfig& cfg) {
    Boxes b;
    b.lo = {0.0, 0.0, cfg.theta_min, cfg.theta_min, 0.0, 0.0, 0.0, 0.0};
    b.hi = {cfg.beta_max, cfg.beta_max, 1.0, 1.0, 1.0, cfg.y_max, 1.0, cfg.y_max};
    return b;
}

DriverParams to_params(const Candidate& x, double premium) {
    DriverParams d;
    d.beta_p = x[0];
    d.beta_y = x[1];
    d.theta_p = x[2];
    d.theta_y = x[3];
    d.baseline_p = x[4];
    d.baseline_y = x[5];
    d.premium = premium;
    return d;
}

// One chain of the separable loss: x' = (theta - beta*c) x + (1-theta)*base,
// clamped to [0, hi]; absolute deviations against the observations.
double chain_loss(double beta, double theta, double base, double x0,
                  const std::vector<double>& obs, const std::vector<double>& discounts,
                  double hi) {
    double x = x0;
    double total = 0.0;
    for (std::size_t k = 0; k < obs.size(); ++k) {
        x = (theta - beta * discounts[k]) * x + (1.0 - theta) * base;
        x = std::clamp(x, 0.0, hi);
        total += std::abs(x - obs[k]);
    }
    return total;
}

double full_loss(const Candidate& x, const ObservationSeries& obs, double weight, double y_max) {
    return chain_loss(x[0], x[2], x[4], x[6], obs.observed_p, obs.discounts, 1.0) +
           weight * chain_loss(x[1], x[3], x[5], x[7], obs.observed_y, obs.discounts, y_max);
}

struct ChainFit {
    double beta = 0.0, theta = 0.5, base = 0.0, x0 = 0.0;
    double loss = std::numeric_limits<double>::infinity();
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Teacher-forced surrogate: for k >= 1 the recurrence written against the
// observed previous state is linear in the offset w = (1-theta)*base,
//   obs[k] ~ (theta - beta*c_k) * obs[k-1] + w,
// so for each (beta, theta) on a scan grid the L1-optimal w is the median of
// the implied offsets; the initial state then zeroes the first residual.
// Exact on noise-free interior data, a strong start otherwise.
ChainFit surrogate_chain(const std::vector<double>& obs, const std::vector<double>& discounts,
                         double hi, double beta_max, double theta_min) {
    constexpr int kBetaGrid = 41;
    constexpr int kThetaGrid = 41;
    ChainFit best;
    std::vector<double> offsets;
    offsets.reserve(obs.size());
    for (int bi = 0; bi < kBetaGrid; ++bi) {
        const double beta = beta_max * bi / (kBetaGrid - 1);
        for (int ti = 0; ti < kThetaGrid; ++ti) {
            const double theta = theta_min + (1.0 - theta_min) * ti / (kThetaGrid - 1);
            double w;
            if (obs.size() >= 2) {
                offsets.clear();
                for (std::size_t k = 1; k < obs.size(); ++k) {
                    offsets.push_back(obs[k] - (theta - beta * discounts[k]) * obs[k - 1]);
                }
                w = median(offsets);
            } else {
                w = (1.0 - theta) * obs[0];
            }
            double base = theta < 1.0 - 1e-12 ? w / (1.0 - theta) : obs.back();
            base = std::clamp(base, 0.0, hi);
            const double den = theta - beta * discounts[0];
            double x0 = std::abs(den) > 1e-9 ? (obs[0] - w) / den : obs[0];
            x0 = std::clamp(x0, 0.0, hi);
            const double l = chain_loss(beta, theta, base, x0, obs, discounts, hi);
            if (l < best.loss) best = {beta, theta, base, x0, l};
        }
    }
    return best;
}

// Per-chain exhaustive scan on the same 5-point axis grids the default
// brute-force oracle uses; by separability its chain sum can never lose to
// the joint 5^8 grid minimum.
ChainFit scan_chain(const std::vector<double>& obs, const std::vector<double>& discounts,
                    double hi, double beta_max, double theta_min, int points) {
    ChainFit best;
    for (int a = 0; a < points; ++a) {
        const double beta = beta_max * a / (points - 1);
        for (int b = 0; b < points; ++b) {
            const double theta = theta_min + (1.0 - theta_min) * b / (points - 1);
            for (int c = 0; c < points; ++c) {
                const double base = hi * c / (points - 1);
                for (int d = 0; d < points; ++d) {
                    const double x0 = hi * d / (points - 1);
                    const double l = chain_loss(beta, theta, base, x0, obs, discounts, hi);
                    if (l < best.loss) best = {beta, theta, base, x0, l};
                }
            }
        }
    }
    return best;
}

// Axis minimization: coarse scan over the box, then golden-section between
// the best scan point's neighbors.
template <typename Eval>
double minimize_axis(double lo, double hi, Eval eval, double& fbest) {
    constexpr int kScan = 25;
    double best_x = lo;
    double best_f = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kScan; ++i) {
        const double x = lo + (hi - lo) * i / (kScan - 1);
        const double f = eval(x);
        if (f < best_f) {
            best_f = f;
            best_x = x;
        }
    }
    const double span = (hi - lo) / (kScan - 1);
    double a = std::max(lo, best_x - span);
    double b = std::min(hi, best_x + span);
    double c1 = b - kGolden * (b - a);
    double c2 = a + kGolden * (b - a);
    double f1 = eval(c1);
    double f2 = eval(c2);
    for (int it = 0; it < 40; ++it) {
        if (f1 < f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - kGolden * (b - a);
            f1 = eval(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + kGolden * (b - a);
            f2 = eval(c2);
        }
    }
    if (f1 < best_f) {
        best_f = f1;
        best_x = c1;
    }
    if (f2 < best_f) {
        best_f = f2;
        best_x = c2;
    }
    fbest = best_f;
    return best_x;
}

bool all_equal(const std::vector<double>& v) {
    for (double x : v) {
        if (x != v.front()) return false;
    }
    return true;
}

int distinct_count(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return static_cast<int>(std::unique(v.begin(), v.end()) - v.begin());
}

}  // namespace

void validate(const ObservationSeries& obs) {
    if (obs.observed_p.size() != obs.observed_y.size() ||
        obs.observed_p.size() != obs.discounts.size()) {
        throw std::invalid_argument("observation sequences must have equal length");
    }
    if (obs.observed_p.size() < 2) {
        throw std::invalid_argument("observation series must have length >= 2");
    }
    for (std::size_t k = 0; k < obs.observed_p.size(); ++k) {
        if (!std::isfinite(obs.observed_p[k]) || obs.observed_p[k] < 0.0 ||
            obs.observed_p[k] > 1.0) {
            throw std::invalid_argument("observed_p out of [0, 1]");
        }
        if (!std::isfinite(obs.observed_y[k]) || obs.observed_y[k] < 0.0) {
            throw std::invalid_argument("observed_y must be >= 0");
        }
        if (!std::isfinite(obs.discounts[k]) || obs.discounts[k] < 0.0 ||
            obs.discounts[k] > 1.0) {
            throw std::invalid_argument("discount out of [0, 1]");
        }
    }
}

void validate(const EstimatorConfig& cfg) {
    if (cfg.multistart_count < 1) throw std::invalid_argument("multistart_count must be >= 1");
    if (cfg.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (cfg.tolerance <= 0.0) throw std::invalid_argument("tolerance must be > 0");
    if (cfg.beta_max <= 0.0) throw std::invalid_argument("beta_max must be > 0");
    if (cfg.theta_min <= 0.0 || cfg.theta_min >= 1.0) {
        throw std::invalid_argument("theta_min must be in (0, 1)");
    }
    if (cfg.y_max <= 0.0) throw std::invalid_argument("estimator y_max must be > 0");
}

double resolved_loss_weight(const EstimatorConfig& cfg, const ObservationSeries& obs) {
    if (cfg.loss_weight > 0.0) return cfg.loss_weight;
    double mean = 0.0;
    for (double y : obs.observed_y) mean += y;
    mean /= static_cast<double>(obs.observed_y.size());
    return mean > 0.0 ? 1.0 / mean : 1.0;
}

double loss(const DriverParams& params, const DriverState& initial, const ObservationSeries& obs,
            const EstimatorConfig& cfg) {
    validate(obs);
    validate(cfg);
    validate(params);
    validate(initial, cfg.y_max);
    const double weight = resolved_loss_weight(cfg, obs);
    const auto states = rollout(initial, params, obs.discounts, cfg.y_max);
    double total = 0.0;
    for (std::size_t k = 0; k < obs.observed_p.size(); ++k) {
        total += std::abs(states[k + 1].p - obs.observed_p[k]) +
                 weight * std::abs(states[k + 1].y - obs.observed_y[k]);
    }
    return total;
}

FitResult fit(const ObservationSeries& obs, double premium, const EstimatorConfig& cfg,
              std::uint64_t seed) {
    validate(obs);
    validate(cfg);
    if (!(premium > 0.0)) throw std::invalid_argument("premium must be > 0");

    const bool zero_discounts = all_equal(obs.discounts) && obs.discounts.front() == 0.0;
    const bool constant_series = all_equal(obs.observed_p) && all_equal(obs.observed_y);
    const bool low_excitation = distinct_count(obs.discounts) < 2;

    if (zero_discounts && constant_series) {
        // Degenerate: betas are unidentified; return the trivially consistent fit.
        FitResult r;
        r.params = to_params({0.0, 0.0, 0.5, 0.5, obs.observed_p.front(), obs.observed_y.front(),
                              obs.observed_p.front(), obs.observed_y.front()},
                             premium);
        r.initial_state = {obs.observed_p.front(), obs.observed_y.front()};
        r.objective = 0.0;
        r.low_excitation = true;
        return r;
    }

    const double weight = resolved_loss_weight(cfg, obs);
    const Boxes boxes = make_boxes(cfg);

    std::vector<Candidate> starts;
    {
        const ChainFit sp = surrogate_chain(obs.observed_p, obs.discounts, 1.0, cfg.beta_max,
                                            cfg.theta_min);
        const ChainFit sy = surrogate_chain(obs.observed_y, obs.discounts, cfg.y_max,
                                            cfg.beta_max, cfg.theta_min);
        starts.push_back(
            {sp.beta, sy.beta, sp.theta, sy.theta, sp.base, sy.base, sp.x0, sy.x0});
    }
    {
        const ChainFit gp =
            scan_chain(obs.observed_p, obs.discounts, 1.0, cfg.beta_max, cfg.theta_min, 5);
        const ChainFit gy =
            scan_chain(obs.observed_y, obs.discounts, cfg.y_max, cfg.beta_max, cfg.theta_min, 5);
        starts.push_back(
            {gp.beta, gy.beta, gp.theta, gy.theta, gp.base, gy.base, gp.x0, gy.x0});
    }
    {
        double mean_p = 0.0, mean_y = 0.0;
        for (double p : obs.observed_p) mean_p += p;
        for (double y : obs.observed_y) mean_y += y;
        mean_p /= static_cast<double>(obs.observed_p.size());
        mean_y /= static_cast<double>(obs.observed_y.size());
        starts.push_back({1.0, 1.0, 0.5, 0.5, mean_p, std::min(mean_y, cfg.y_max),
                          obs.observed_p.front(), std::min(obs.observed_y.front(), cfg.y_max)});
    }
    RngStream rng(seed, 0, rng_purpose::kFitStart);
    for (int s = 0; s < cfg.multistart_count; ++s) {
        Candidate x;
        for (int a = 0; a < 8; ++a) x[a] = rng.uniform(boxes.lo[a], boxes.hi[a]);
        starts.push_back(x);
    }

    Candidate best_x = starts.front();
    double best_f = full_loss(best_x, obs, weight, cfg.y_max);
    for (Candidate x : starts) {
        double f = full_loss(x, obs, weight, cfg.y_max);
        if (f < best_f) {
            best_f = f;
            best_x = x;
        }
        for (int sweep = 0; sweep < cfg.max_iterations; ++sweep) {
            const double f_before = f;
            for (int axis = 0; axis < 8; ++axis) {
                double fa;
                x[axis] = minimize_axis(boxes.lo[axis], boxes.hi[axis],
                                        [&](double v) {
                                            Candidate probe = x;
                                            probe[axis] = v;
                                            return full_loss(probe, obs, weight, cfg.y_max);
                                        },
                                        fa);
                f = fa;
                if (f < best_f) {
                    best_f = f;
                    best_x = x;
                }
            }
            if (f_before - f < cfg.tolerance) break;
        }
    }

    FitResult r;
    r.params = to_params(best_x, premium);
    r.initial_state = {best_x[6], best_x[7]};
    r.objective = best_f;
    r.low_excitation = low_excitation;
    return r;
}

FitResult brute_force_fit(const ObservationSeries& obs, double premium, int grid_points_per_axis,
                          const EstimatorConfig& cfg) {
    validate(obs);
    validate(cfg);
    if (grid_points_per_axis < 3) {
        throw std::invalid_argument("grid_points_per_axis must be >= 3");
    }
    const int G = grid_points_per_axis;
    const double weight = resolved_loss_weight(cfg, obs);
    const Boxes boxes = make_boxes(cfg);

    auto axis_value = [&](int axis, int i) {
        return boxes.lo[axis] + (boxes.hi[axis] - boxes.lo[axis]) * i / (G - 1);
    };

    Candidate best_x{};
    double best_f = std::numeric_limits<double>::infinity();
    Candidate x{};
    std::array<int, 8> idx{};
    // Odometer over the 8-dimensional grid, first-found minimum kept on ties.
    for (int a = 0; a < 8; ++a) x[a] = axis_value(a, 0);
    while (true) {
        const double f = full_loss(x, obs, weight, cfg.y_max);
        if (f < best_f) {
            best_f = f;
            best_x = x;
        }
        int axis = 7;
        while (axis >= 0) {
            if (++idx[axis] < G) {
                x[axis] = axis_value(axis, idx[axis]);
                break;
            }
            idx[axis] = 0;
            x[axis] = axis_value(axis, 0);
            --axis;
        }
        if (axis < 0) break;
    }

    FitResult r;
    r.params = to_params(best_x, premium);
    r.initial_state = {best_x[6], best_x[7]};
    r.objective = best_f;
    r.low_excitation = distinct_count(obs.discounts) < 2;
    return r;
}

}  // namespace ubi
