#include "ubi/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ubi {

namespace {

constexpr double kGolden = 0.6180339887498949;  // (sqrt(5)-1)/2

void check_lambdas(std::span<const double> lambdas) {
    for (double l : lambdas) {
        if (!std::isfinite(l) || l < 0.0) {
            throw std::invalid_argument("lambda must be finite and >= 0");
        }
    }
}

// Locates the grid cell for a coordinate in [0, span]: index of the lower
// node (at most nodes-2) and the fractional offset within the cell.
inline void locate(double v, double inv_spacing, int nodes, int& idx, double& frac) {
    double x = v * inv_spacing;
    int i = static_cast<int>(x);
    if (i > nodes - 2) i = nodes - 2;
    idx = i;
    frac = x - i;
}

// Per-candidate affine transition coefficients for one axis: x' = a*x + b.
struct AxisTransition {
    std::vector<double> value;  // clamped next coordinate, [node * K + k]
    std::vector<int> cell;
    std::vector<double> frac;
};

AxisTransition build_axis(int nodes, double span, double beta, double theta, double baseline,
                          const std::vector<double>& cands) {
    const int K = static_cast<int>(cands.size());
    AxisTransition tr;
    tr.value.resize(static_cast<std::size_t>(nodes) * K);
    tr.cell.resize(tr.value.size());
    tr.frac.resize(tr.value.size());
    const double spacing = span / (nodes - 1);
    const double inv_spacing = 1.0 / spacing;
    const double offset = (1.0 - theta) * baseline;
    for (int i = 0; i < nodes; ++i) {
        const double x = i * spacing;
        for (int k = 0; k < K; ++k) {
            double next = (theta - beta * cands[k]) * x + offset;
            next = std::clamp(next, 0.0, span);
            const std::size_t at = static_cast<std::size_t>(i) * K + k;
            tr.value[at] = next;
            locate(next, inv_spacing, nodes, tr.cell[at], tr.frac[at]);
        }
    }
    return tr;
}

inline double bilinear(const double* layer, int y_nodes, int jp, int jy, double fp, double fy) {
    const double* row0 = layer + static_cast<std::size_t>(jp) * y_nodes + jy;
    const double* row1 = row0 + y_nodes;
    const double v0 = row0[0] + fy * (row0[1] - row0[0]);
    const double v1 = row1[0] + fy * (row1[1] - row1[0]);
    return v0 + fp * (v1 - v0);
}

// Penalized one-step objective at a continuous state against the next layer.
double q_value(const DriverState& s, const DriverParams& params, double lambda, double c,
               const GridSpec& grid, std::span<const double> next_layer) {
    DriverState nxt = step(s, params, c, grid.y_max);
    return (1.0 + lambda) * params.premium * c + nxt.p * nxt.y +
           interpolate(next_layer, grid, nxt);
}

// One golden-section pass between lo and hi; returns the refined (c, Q) if it
// beats the incumbent.
template <typename Eval>
void refine_golden(double lo, double hi, Eval eval, double& best_c, double& best_q) {
    double a = lo, b = hi;
    double c1 = b - kGolden * (b - a);
    double c2 = a + kGolden * (b - a);
    double f1 = eval(c1);
    double f2 = eval(c2);
    for (int it = 0; it < 32; ++it) {
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
    const double c = f1 < f2 ? c1 : c2;
    const double f = std::min(f1, f2);
    if (f < best_q) {
        best_q = f;
        best_c = c;
    }
}

}  // namespace

void validate(const GridSpec& grid) {
    if (grid.p_nodes < 2 || grid.y_nodes < 2) {
        throw std::invalid_argument("grid needs at least 2 nodes per axis");
    }
    if (!std::isfinite(grid.y_max) || grid.y_max <= 0.0) {
        throw std::invalid_argument("y_max must be finite and > 0");
    }
    if (grid.discount_candidates < 2) {
        throw std::invalid_argument("need at least 2 discount candidates");
    }
    if (!std::isfinite(grid.eta) || grid.eta <= 0.0 || grid.eta > 1.0) {
        throw std::invalid_argument("eta must be in (0, 1]");
    }
}

double grid_spacing(const GridSpec& grid) {
    return std::max(1.0 / (grid.p_nodes - 1), grid.y_max / (grid.y_nodes - 1));
}

std::vector<double> discount_candidates(const GridSpec& grid) {
    std::vector<double> cands(grid.discount_candidates);
    for (int k = 0; k < grid.discount_candidates; ++k) {
        cands[k] = grid.eta * k / (grid.discount_candidates - 1);
    }
    return cands;
}

double interpolate(std::span<const double> layer, const GridSpec& grid,
                   const DriverState& query) {
    if (layer.size() != static_cast<std::size_t>(grid.p_nodes) * grid.y_nodes) {
        throw std::invalid_argument("layer size does not match grid");
    }
    if (!(query.p >= 0.0 && query.p <= 1.0 && query.y >= 0.0 && query.y <= grid.y_max)) {
        throw std::domain_error("interpolation query outside grid domain");
    }
    int jp, jy;
    double fp, fy;
    locate(query.p, grid.p_nodes - 1.0, grid.p_nodes, jp, fp);
    locate(query.y, (grid.y_nodes - 1.0) / grid.y_max, grid.y_nodes, jy, fy);
    return bilinear(layer.data(), grid.y_nodes, jp, jy, fp, fy);
}

ValueTable backward_induction(const DriverParams& params, std::span<const double> lambdas,
                              const GridSpec& grid) {
    validate(grid);
    validate(params);
    check_lambdas(lambdas);

    const int M = static_cast<int>(lambdas.size());
    const int pn = grid.p_nodes;
    const int yn = grid.y_nodes;
    const auto cands = discount_candidates(grid);
    const int K = static_cast<int>(cands.size());

    // Dynamics are time-invariant, so the per-axis transitions are shared by
    // every layer; only the penalty coefficient changes with t.
    const AxisTransition ptr = build_axis(pn, 1.0, params.beta_p, params.theta_p,
                                          params.baseline_p, cands);
    const AxisTransition ytr = build_axis(yn, grid.y_max, params.beta_y, params.theta_y,
                                          params.baseline_y, cands);

    ValueTable table;
    table.grid = grid;
    table.lambdas.assign(lambdas.begin(), lambdas.end());
    table.values.assign(M + 1, std::vector<double>(static_cast<std::size_t>(pn) * yn, 0.0));
    table.policy.assign(M, std::vector<double>(static_cast<std::size_t>(pn) * yn, 0.0));

    std::vector<double> penalty(K);
    for (int t = M - 1; t >= 0; --t) {
        const double* next = table.values[t + 1].data();
        double* cur = table.values[t].data();
        double* pol = table.policy[t].data();
        for (int k = 0; k < K; ++k) {
            penalty[k] = (1.0 + lambdas[t]) * params.premium * cands[k];
        }
        for (int ip = 0; ip < pn; ++ip) {
            const double* pvals = &ptr.value[static_cast<std::size_t>(ip) * K];
            const int* pcell = &ptr.cell[static_cast<std::size_t>(ip) * K];
            const double* pfrac = &ptr.frac[static_cast<std::size_t>(ip) * K];
            for (int iy = 0; iy < yn; ++iy) {
                const double* yvals = &ytr.value[static_cast<std::size_t>(iy) * K];
                const int* ycell = &ytr.cell[static_cast<std::size_t>(iy) * K];
                const double* yfrac = &ytr.frac[static_cast<std::size_t>(iy) * K];
                double best_q = std::numeric_limits<double>::infinity();
                int best_k = 0;
                for (int k = 0; k < K; ++k) {
                    const double q = penalty[k] + pvals[k] * yvals[k] +
                                     bilinear(next, yn, pcell[k], ycell[k], pfrac[k], yfrac[k]);
                    if (q < best_q) {  // strict: ties keep the smaller discount
                        best_q = q;
                        best_k = k;
                    }
                }
                double best_c = cands[best_k];
                if (grid.refine_policy) {
                    const DriverState node{static_cast<double>(ip) / (pn - 1),
                                           grid.y_max * iy / (yn - 1)};
                    const double lo = cands[std::max(best_k - 1, 0)];
                    const double hi = cands[std::min(best_k + 1, K - 1)];
                    refine_golden(lo, hi,
                                  [&](double c) {
                                      return q_value(node, params, lambdas[t], c, grid,
                                                     table.values[t + 1]);
                                  },
                                  best_c, best_q);
                }
                const std::size_t at = static_cast<std::size_t>(ip) * yn + iy;
                cur[at] = best_q;
                pol[at] = best_c;
            }
        }
    }
    return table;
}

RolloutOutcome greedy_rollout(const ValueTable& table, const DriverState& initial,
                              const DriverParams& params) {
    const GridSpec& grid = table.grid;
    validate(initial, grid.y_max);
    const auto cands = discount_candidates(grid);
    const int M = static_cast<int>(table.lambdas.size());

    RolloutOutcome out;
    out.states.reserve(M + 1);
    out.states.push_back(initial);
    DriverState s = initial;
    for (int t = 0; t < M; ++t) {
        const auto& next_layer = table.values[t + 1];
        const double lambda = table.lambdas[t];
        double best_q = std::numeric_limits<double>::infinity();
        double best_c = 0.0;
        for (double c : cands) {
            const double q = q_value(s, params, lambda, c, grid, next_layer);
            if (q < best_q) {
                best_q = q;
                best_c = c;
            }
        }
        if (grid.refine_policy) {
            const auto it = std::lower_bound(cands.begin(), cands.end(), best_c);
            const int k = static_cast<int>(it - cands.begin());
            const double lo = cands[std::max(k - 1, 0)];
            const double hi = cands[std::min(k + 1, static_cast<int>(cands.size()) - 1)];
            refine_golden(lo, hi,
                          [&](double c) { return q_value(s, params, lambda, c, grid, next_layer); },
                          best_c, best_q);
        }
        s = step(s, params, best_c, grid.y_max);
        out.schedule.push_back(best_c);
        out.states.push_back(s);
        out.realized_cost += params.premium * best_c + s.p * s.y;
        out.penalized_cost += (1.0 + lambda) * params.premium * best_c + s.p * s.y;
    }
    return out;
}

namespace {

// Exact optimal penalized cost-to-go by full enumeration of the candidate tree.
double tree_value(const DriverState& s, const DriverParams& params,
                  std::span<const double> lambdas, std::size_t t,
                  const std::vector<double>& cands, double y_max) {
    if (t == lambdas.size()) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (double c : cands) {
        const DriverState nxt = step(s, params, c, y_max);
        const double q = (1.0 + lambdas[t]) * params.premium * c + nxt.p * nxt.y +
                         tree_value(nxt, params, lambdas, t + 1, cands, y_max);
        if (q < best) best = q;
    }
    return best;
}

}  // namespace

RolloutOutcome exact_greedy_rollout(const DriverParams& params, std::span<const double> lambdas,
                                    const DriverState& initial, const GridSpec& grid) {
    validate(params);
    check_lambdas(lambdas);
    validate(initial, grid.y_max);
    const auto cands = discount_candidates(grid);
    const double tree = std::pow(static_cast<double>(cands.size()),
                                 static_cast<double>(lambdas.size()));
    if (tree > static_cast<double>(1 << 20)) {
        throw std::invalid_argument("exact rollout tree too large");
    }

    RolloutOutcome out;
    out.states.push_back(initial);
    DriverState s = initial;
    for (std::size_t t = 0; t < lambdas.size(); ++t) {
        double best_q = std::numeric_limits<double>::infinity();
        double best_c = 0.0;
        DriverState best_next{};
        for (double c : cands) {
            const DriverState nxt = step(s, params, c, grid.y_max);
            const double q = (1.0 + lambdas[t]) * params.premium * c + nxt.p * nxt.y +
                             tree_value(nxt, params, lambdas, t + 1, cands, grid.y_max);
            if (q < best_q) {
                best_q = q;
                best_c = c;
                best_next = nxt;
            }
        }
        s = best_next;
        out.schedule.push_back(best_c);
        out.states.push_back(s);
        out.realized_cost += params.premium * best_c + s.p * s.y;
        out.penalized_cost += (1.0 + lambdas[t]) * params.premium * best_c + s.p * s.y;
    }
    return out;
}

}  // namespace ubi
