#pragma once

// Checkable versions of the convergence theory: rank-condition grids,
// convexity maps, local-convergence radii, norm-equivalence constants,
// misspecification bounds, and the global-to-local feasibility predicate.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "gmmiter/model.hpp"
#include "gmmiter/numerics.hpp"

namespace gmmiter {

// Hessian convention for reported curvature: `half` is the objective
// (1/2) g'Wg used by the optimizers; `doubled` is the Hessian of g'Wg, the
// scale in which the reference eigenvalues (74, 2) are quoted.
enum class Convention { half, doubled };

inline constexpr double kRankThreshold = 1e-8;

// Regular product grid with nodes_per_dim points along each axis, inclusive
// of the endpoints. The first coordinate varies slowest so 1-d grids come out
// in increasing order.
inline std::vector<Vector> product_grid(const Vector& lower, const Vector& upper,
                                        int nodes_per_dim) {
    if (lower.size() != upper.size() || lower.size() == 0) {
        throw InvalidInputError("product_grid: bad box");
    }
    if (nodes_per_dim < 1) throw InvalidInputError("product_grid: need at least 1 node per axis");
    for (Eigen::Index j = 0; j < lower.size(); ++j) {
        if (!(lower(j) <= upper(j))) throw InvalidInputError("product_grid: inverted box");
    }
    const int d = static_cast<int>(lower.size());
    std::size_t total = 1;
    for (int j = 0; j < d; ++j) total *= static_cast<std::size_t>(nodes_per_dim);

    std::vector<Vector> grid;
    grid.reserve(total);
    std::vector<int> index(d, 0);
    for (std::size_t i = 0; i < total; ++i) {
        Vector node(d);
        for (int j = 0; j < d; ++j) {
            node(j) = nodes_per_dim == 1
                          ? lower(j)
                          : lower(j) + (upper(j) - lower(j)) * index[j] / (nodes_per_dim - 1);
        }
        grid.push_back(std::move(node));
        for (int j = d - 1; j >= 0; --j) {
            if (++index[j] < nodes_per_dim) break;
            index[j] = 0;
        }
    }
    return grid;
}

struct RankGridReport {
    std::vector<Vector> grid;  // evaluated nodes
    bool over_identified = false;
    Matrix values;             // n x 1 (just-identified) or n x n (pairs)
    double min_value = 0.0;
    std::pair<int, int> argmin{-1, -1};
    double threshold = kRankThreshold;
    bool sign_change = false;  // det G(t1)'WG(t2) changes sign across pairs
    bool holds = false;        // min > threshold and no sign change
    int failures = 0;          // nodes excluded on Jacobian failure
};

namespace detail {

// Evaluate fn(i) for i in [0, n) on a small worker pool; results land in a
// pre-sized vector so the output order is deterministic.
template <class Fn>
void parallel_for_index(int n, Fn&& fn) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int workers = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(n)));
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::future<void>> futures;
    futures.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&]() {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        }));
    }
    for (auto& fut : futures) fut.get();
}

// Model code signals out-of-domain points with exceptions derived from
// std::domain_error; catching the base keeps this header independent of any
// particular model family.
using DomainErrorBase = std::domain_error;

struct NodeJacobians {
    std::vector<Matrix> jac;
    std::vector<char> ok;
    int failures = 0;
};

inline NodeJacobians eval_jacobians(const MomentModel& model, const std::vector<Vector>& grid) {
    NodeJacobians out;
    const int n = static_cast<int>(grid.size());
    out.jac.resize(n);
    out.ok.assign(n, 0);
    parallel_for_index(n, [&](int i) {
        try {
            out.jac[i] = model.eval_jacobian(grid[i]);
            out.ok[i] = 1;
        } catch (const EvaluationError&) {
        } catch (const DomainErrorBase&) {
        }
    });
    for (char okable : out.ok) {
        if (!okable) ++out.failures;
    }
    return out;
}

}  // namespace detail

// sigma_min[G(theta)] over a grid, for just-identified models (m = d).
inline RankGridReport rank_grid_just_identified(const MomentModel& model,
                                                const std::vector<Vector>& grid,
                                                double threshold = kRankThreshold) {
    if (model.moment_dim != model.param_dim) {
        throw InvalidInputError("rank_grid_just_identified: model is not just-identified");
    }
    if (grid.empty()) throw InvalidInputError("rank_grid_just_identified: empty grid");

    RankGridReport report;
    report.grid = grid;
    report.threshold = threshold;
    const int n = static_cast<int>(grid.size());
    report.values = Matrix::Constant(n, 1, std::numeric_limits<double>::quiet_NaN());

    detail::NodeJacobians nodes = detail::eval_jacobians(model, grid);
    report.failures = nodes.failures;
    for (int i = 0; i < n; ++i) {
        if (nodes.ok[i]) report.values(i, 0) = min_singular_value(nodes.jac[i]);
    }

    report.min_value = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double v = report.values(i, 0);
        if (std::isfinite(v) && v < report.min_value) {
            report.min_value = v;
            report.argmin = {i, i};
        }
    }
    report.holds = report.min_value > threshold;
    return report;
}

// sigma_min[G(theta_i)' W G(theta_j)] over all ordered pairs. A sign change
// of det G'WG across pairs certifies a zero crossing even when no node lands
// exactly on it, so the verdict fails on either a small minimum or a flip.
inline RankGridReport rank_grid_over_identified(const MomentModel& model, const WeightingSpec& w,
                                                const std::vector<Vector>& grid,
                                                double threshold = kRankThreshold) {
    if (grid.empty()) throw InvalidInputError("rank_grid_over_identified: empty grid");

    RankGridReport report;
    report.grid = grid;
    report.over_identified = true;
    report.threshold = threshold;
    const int n = static_cast<int>(grid.size());
    report.values = Matrix::Constant(n, n, std::numeric_limits<double>::quiet_NaN());

    detail::NodeJacobians nodes = detail::eval_jacobians(model, grid);
    report.failures = nodes.failures;

    std::vector<Matrix> wjac(n);
    for (int i = 0; i < n; ++i) {
        if (nodes.ok[i]) wjac[i] = w.w * nodes.jac[i];
    }

    Matrix dets = Matrix::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
    detail::parallel_for_index(n, [&](int i) {
        if (!nodes.ok[i]) return;
        for (int j = 0; j < n; ++j) {
            if (!nodes.ok[j]) continue;
            const Matrix prod = nodes.jac[i].transpose() * wjac[j];
            report.values(i, j) = min_singular_value(prod);
            dets(i, j) = prod.determinant();
        }
    });

    report.min_value = std::numeric_limits<double>::infinity();
    bool seen_pos = false, seen_neg = false;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double v = report.values(i, j);
            if (!std::isfinite(v)) continue;
            if (v < report.min_value) {
                report.min_value = v;
                report.argmin = {i, j};
            }
            if (dets(i, j) > 0.0) seen_pos = true;
            if (dets(i, j) < 0.0) seen_neg = true;
        }
    }
    report.sign_change = seen_pos && seen_neg;
    report.holds = report.min_value > threshold && !report.sign_change;
    return report;
}

struct ConvexityMapReport {
    std::vector<Vector> grid;
    Convention convention = Convention::doubled;
    std::vector<double> lambda_min;  // NaN where evaluation failed
    double min_value = 0.0;
    bool any_negative = false;  // certified non-convexity on the grid
    int failures = 0;
};

// Smallest Hessian eigenvalue per node: of g'Wg under `doubled` (the
// reference scale), of Q = (1/2) g'Wg under `half`.
inline ConvexityMapReport convexity_map(const MomentModel& model, const WeightingSpec& w,
                                        const std::vector<Vector>& grid,
                                        Convention convention = Convention::doubled) {
    if (grid.empty()) throw InvalidInputError("convexity_map: empty grid");
    ConvexityMapReport report;
    report.grid = grid;
    report.convention = convention;
    const int n = static_cast<int>(grid.size());
    report.lambda_min.assign(n, std::numeric_limits<double>::quiet_NaN());

    const double scale = convention == Convention::doubled ? 2.0 : 1.0;
    detail::parallel_for_index(n, [&](int i) {
        try {
            const Matrix hess = scale * full_hessian(model, w, grid[i]);
            report.lambda_min[i] = sym_eigenvalues(hess)(hess.rows() - 1);
        } catch (const EvaluationError&) {
        } catch (const detail::DomainErrorBase&) {
        }
    });

    report.min_value = std::numeric_limits<double>::infinity();
    for (double v : report.lambda_min) {
        if (!std::isfinite(v)) {
            ++report.failures;
            continue;
        }
        report.min_value = std::min(report.min_value, v);
        if (v < 0.0) report.any_negative = true;
    }
    return report;
}

struct ConvergenceConstants {
    double sigma_lower = 0.0;    // min over grid of sigma_min[G]
    double sigma_upper = 0.0;    // max over grid of sigma_max[G]
    double lipschitz = 0.0;      // max pairwise ||G(t1)-G(t2)|| / ||t1-t2||
    double lambda_w_lower = 1.0; // eigenvalue bounds of W
    double lambda_w_upper = 1.0;
    double kappa_w = 1.0;
    double lambda_lower = 0.0;   // min over grid of lambda_min[G'WG]
    double lambda_upper = 0.0;   // max over grid of lambda_max[G'WG]

    void validate() const {
        if (!(sigma_lower > 0.0) || sigma_lower > sigma_upper) {
            throw InvalidInputError("ConvergenceConstants: need 0 < sigma_lower <= sigma_upper");
        }
        if (!(lambda_w_lower > 0.0) || lambda_w_lower > lambda_w_upper) {
            throw InvalidInputError("ConvergenceConstants: bad weighting eigenvalue bounds");
        }
    }
};

// Empirical constants from grid extremes. These are inner approximations:
// grid minima overestimate sigma_lower, pairwise slopes underestimate the
// true Lipschitz constant.
inline ConvergenceConstants estimate_constants(const MomentModel& model, const WeightingSpec& w,
                                               const std::vector<Vector>& grid) {
    if (grid.size() < 2) throw InvalidInputError("estimate_constants: need at least 2 nodes");

    detail::NodeJacobians nodes = detail::eval_jacobians(model, grid);
    ConvergenceConstants c;
    c.sigma_lower = std::numeric_limits<double>::infinity();
    c.sigma_upper = 0.0;
    c.lambda_lower = std::numeric_limits<double>::infinity();
    c.lambda_upper = -std::numeric_limits<double>::infinity();

    const int n = static_cast<int>(grid.size());
    for (int i = 0; i < n; ++i) {
        if (!nodes.ok[i]) continue;
        c.sigma_lower = std::min(c.sigma_lower, min_singular_value(nodes.jac[i]));
        c.sigma_upper = std::max(c.sigma_upper, max_singular_value(nodes.jac[i]));
        const Matrix gwg = nodes.jac[i].transpose() * w.w * nodes.jac[i];
        const Vector ev = sym_eigenvalues(0.5 * (gwg + gwg.transpose()));
        c.lambda_lower = std::min(c.lambda_lower, ev(ev.size() - 1));
        c.lambda_upper = std::max(c.lambda_upper, ev(0));
    }
    for (int i = 0; i < n; ++i) {
        if (!nodes.ok[i]) continue;
        for (int j = i + 1; j < n; ++j) {
            if (!nodes.ok[j]) continue;
            const double dist = (grid[i] - grid[j]).norm();
            if (dist <= 0.0) continue;
            const double slope = max_singular_value(nodes.jac[i] - nodes.jac[j]) / dist;
            c.lipschitz = std::max(c.lipschitz, slope);
        }
    }

    const Vector wev = sym_eigenvalues(w.w);
    c.lambda_w_lower = wev(wev.size() - 1);
    c.lambda_w_upper = wev(0);
    c.kappa_w = c.lambda_w_upper / c.lambda_w_lower;
    return c;
}

struct RadiusReport {
    double r_tilde = 0.0;  // the formula value, possibly negative
    double r = 0.0;        // min(r_tilde, r_g)
    bool guaranteed = false;  // r > 0
    bool linear_model = false;  // L = 0: radius unbounded
};

// Guaranteed local-convergence radius
//   R~ = (1 - gamma~/gamma) * sigma_lower * sqrt(lW_lower/lW_upper) / L
//        - ||g(theta-hat)||_W / (sigma_lower * sqrt(lW_lower)),
// clipped by the rank-neighborhood radius r_g.
inline RadiusReport local_radius(const ConvergenceConstants& c, double gamma, double gamma_tilde,
                                 double g_hat_norm,
                                 double r_g = std::numeric_limits<double>::infinity()) {
    c.validate();
    if (!(gamma > 0.0 && gamma <= 1.0) || !(gamma_tilde > 0.0) || !(gamma_tilde < gamma)) {
        throw InvalidInputError("local_radius: need 0 < gamma_tilde < gamma <= 1");
    }
    if (g_hat_norm < 0.0) throw InvalidInputError("local_radius: negative norm");

    RadiusReport report;
    if (c.lipschitz == 0.0) {
        report.linear_model = true;
        report.r_tilde = std::numeric_limits<double>::infinity();
        report.r = r_g;
        report.guaranteed = r_g > 0.0;
        return report;
    }
    const double lead = (1.0 - gamma_tilde / gamma) * c.sigma_lower *
                        std::sqrt(c.lambda_w_lower / c.lambda_w_upper) / c.lipschitz;
    report.r_tilde = lead - g_hat_norm / (c.sigma_lower * std::sqrt(c.lambda_w_lower));
    report.r = std::min(report.r_tilde, r_g);
    report.guaranteed = report.r > 0.0;
    return report;
}

struct NormEquivalenceReport {
    double lambda_lower = 0.0;  // empirical, from Jacobian extremes
    double lambda_upper = 0.0;
    double c_constant = 0.0;    // 2 sqrt(lambda_max(W)) L
    double lower_slack = 0.0;   // lambda_lower - C ||g(theta-hat)||_W
    double upper_slack = 0.0;   // lambda_upper + C ||g(theta-hat)||_W
    int violations = 0;
    int checked = 0;
};

// Checks the two-sided bound
//   (lambda_lower - C r) ||t - t^||^2 <= 2[Q(t) - Q(t^)]
//                                      <= (lambda_upper + C r) ||t - t^||^2
// with r = ||g(theta-hat)||_W, at every grid node.
inline NormEquivalenceReport norm_equivalence_check(const MomentModel& model,
                                                    const WeightingSpec& w, const Vector& theta_hat,
                                                    const std::vector<Vector>& grid) {
    if (grid.empty()) throw InvalidInputError("norm_equivalence_check: empty grid");
    const ConvergenceConstants c = estimate_constants(model, w, grid);

    NormEquivalenceReport report;
    report.lambda_lower = c.lambda_lower;
    report.lambda_upper = c.lambda_upper;
    const Vector wev = sym_eigenvalues(w.w);
    report.c_constant = 2.0 * std::sqrt(wev(0)) * c.lipschitz;

    const ObjectiveReport at_hat = objective(model, w, theta_hat);
    report.lower_slack = c.lambda_lower - report.c_constant * at_hat.weighted_norm;
    report.upper_slack = c.lambda_upper + report.c_constant * at_hat.weighted_norm;

    for (const Vector& theta : grid) {
        double q;
        try {
            q = objective(model, w, theta).q;
        } catch (const EvaluationError&) {
            continue;
        }
        ++report.checked;
        const double dist2 = (theta - theta_hat).squaredNorm();
        const double gap = 2.0 * (q - at_hat.q);
        const double slack = 1e-10 * std::max(1.0, std::abs(gap));  // round-off allowance
        if (gap < report.lower_slack * dist2 - slack || gap > report.upper_slack * dist2 + slack) {
            ++report.violations;
        }
    }
    return report;
}

struct MisspecificationBound {
    double phi_local = 0.0;   // largest misspecification with a local guarantee
    double phi_global = 0.0;  // half of it: the global-step guarantee
    bool unbounded = false;   // L = 0
};

inline MisspecificationBound misspecification_bound(const ConvergenceConstants& c) {
    c.validate();
    MisspecificationBound b;
    if (c.lipschitz == 0.0) {
        b.unbounded = true;
        b.phi_local = std::numeric_limits<double>::infinity();
        b.phi_global = std::numeric_limits<double>::infinity();
        return b;
    }
    b.phi_local = c.sigma_lower * c.sigma_lower * c.lambda_w_lower /
                  (c.lipschitz * std::sqrt(c.lambda_w_upper));
    b.phi_global = 0.5 * b.phi_local;
    return b;
}

struct Theorem3Report {
    bool phi_ok = false;    // phi below the global misspecification bound
    bool gamma_ok = false;  // contraction coefficient bites: gamma c1/2 - gamma^2 c2 > 0
    bool ineq_ok = false;   // the feasibility inequality itself
    bool feasible = false;  // all three
    double lhs = std::numeric_limits<double>::quiet_NaN();
    double rhs = std::numeric_limits<double>::quiet_NaN();
};

// Feasibility of the global-to-local argument at (gamma, phi):
//   [Delta gamma^2 c2 + 2 gamma c3^2 / c1] / ([gamma c1/2 - gamma^2 c2] Delta^2) * phi^2
//     < ((1-eps) sigma_lower / (L sqrt(kappa_W)) - phi / (sigma_lower sqrt(lW_lower)))^2
// with Delta = (sigma_lower^2 lW_lower - 2 L sqrt(lW_upper) phi) / 2,
//      c1 = (2/3) rho^2 ([sigma_lower/sigma_upper]^2 / kappa_W)^2,
//      c2 = L_Q (sigma_upper sqrt(lW_upper) / [sigma_lower^2 lW_lower])^2,
//      c3 = 2 sigma_upper sqrt(lW_upper).
inline Theorem3Report theorem3_conditions(double gamma, double phi, const ConvergenceConstants& c,
                                          double rho = 1.0, double eps = 1e-4, double l_q = 1.0) {
    c.validate();
    if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidInputError("theorem3: gamma must be in (0,1]");
    if (phi < 0.0) throw InvalidInputError("theorem3: phi must be >= 0");
    if (c.lipschitz <= 0.0) throw InvalidInputError("theorem3: needs L > 0");

    Theorem3Report report;
    const double slw = std::sqrt(c.lambda_w_lower);
    const double suw = std::sqrt(c.lambda_w_upper);
    const double c1 = (2.0 / 3.0) * rho * rho *
                      std::pow((c.sigma_lower / c.sigma_upper) * (c.sigma_lower / c.sigma_upper) /
                                   c.kappa_w,
                               2);
    const double c2 = l_q * std::pow(c.sigma_upper * suw /
                                         (c.sigma_lower * c.sigma_lower * c.lambda_w_lower),
                                     2);
    const double c3 = 2.0 * c.sigma_upper * suw;

    report.phi_ok = phi < c.sigma_lower * c.sigma_lower * c.lambda_w_lower /
                              (2.0 * c.lipschitz * suw);
    const double contraction = gamma * c1 / 2.0 - gamma * gamma * c2;
    report.gamma_ok = contraction > 0.0;

    const double delta =
        0.5 * (c.sigma_lower * c.sigma_lower * c.lambda_w_lower - 2.0 * c.lipschitz * suw * phi);
    if (delta > 0.0 && contraction > 0.0) {
        report.lhs = (delta * gamma * gamma * c2 + 2.0 * gamma * c3 * c3 / c1) /
                     (contraction * delta * delta) * phi * phi;
        const double rhs_root = (1.0 - eps) * c.sigma_lower /
                                    (c.lipschitz * std::sqrt(c.kappa_w)) -
                                phi / (c.sigma_lower * slw);
        report.rhs = rhs_root * rhs_root;
        report.ineq_ok = rhs_root > 0.0 && report.lhs < report.rhs;
    }
    report.feasible = report.phi_ok && report.gamma_ok && report.ineq_ok;
    return report;
}

inline bool theorem3_feasible(double gamma, double phi, const ConvergenceConstants& c,
                              double rho = 1.0, double eps = 1e-4, double l_q = 1.0) {
    return theorem3_conditions(gamma, phi, c, rho, eps, l_q).feasible;
}

}  // namespace gmmiter
