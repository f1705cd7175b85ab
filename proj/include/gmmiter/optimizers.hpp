#pragma once

// The fixed-learning-rate iteration
//
//     theta_{k+1} = theta_k - gamma P_k G(theta_k)' W g(theta_k)
//
// with pluggable conditioning matrix P_k (gradient descent, Gauss-Newton,
// Newton-Raphson, Levenberg-Marquardt, BFGS), plus the globalized variant
// that races each local step against a predetermined candidate sequence.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gmmiter/model.hpp"
#include "gmmiter/numerics.hpp"
#include "gmmiter/quasirandom.hpp"

namespace gmmiter {

enum class Method { gd, gn, nr, lm, bfgs };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::gd: return "gd";
        case Method::gn: return "gn";
        case Method::nr: return "nr";
        case Method::lm: return "lm";
        case Method::bfgs: return "bfgs";
    }
    return "?";
}

inline std::optional<Method> method_from_name(const std::string& name) {
    if (name == "gd") return Method::gd;
    if (name == "gn") return Method::gn;
    if (name == "nr") return Method::nr;
    if (name == "lm") return Method::lm;
    if (name == "bfgs") return Method::bfgs;
    return std::nullopt;
}

struct GlobalStepSpec {
    int length = 0;  // candidate count, must cover max_iter
    Vector lower, upper;
    std::uint64_t shift_seed = 0;
};

struct OptimizerConfig {
    Method method = Method::gn;
    double gamma = 0.1;
    double lm_lambda = 0.0;
    int max_iter = 1000;
    double step_tol = 1e-10;
    double grad_tol = 1e-8;
    bool project_to_bounds = false;
    bool nr_require_pd = false;  // strict failure instead of indefinite solves
    std::optional<GlobalStepSpec> global_step;

    void validate() const {
        if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidInputError("gamma must be in (0, 1]");
        if (lm_lambda < 0.0) throw InvalidInputError("lm_lambda must be >= 0");
        if (max_iter < 1) throw InvalidInputError("max_iter must be >= 1");
        if (!(step_tol > 0.0) || !(grad_tol > 0.0)) {
            throw InvalidInputError("tolerances must be positive");
        }
    }
};

enum class Termination { converged, max_iter, step_failure, evaluation_error, left_bounds };

inline const char* termination_name(Termination t) {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::max_iter: return "max_iter";
        case Termination::step_failure: return "step_failure";
        case Termination::evaluation_error: return "evaluation_error";
        case Termination::left_bounds: return "left_bounds";
    }
    return "?";
}

struct IterationRecord {
    int k = 0;
    Vector theta;
    double q = std::numeric_limits<double>::quiet_NaN();
    double step_norm = 0.0;
    double grad_norm = std::numeric_limits<double>::quiet_NaN();
    std::string status = "ok";  // final row carries the termination string
    bool global_accepted = false;
};

struct IterationTrace {
    Method method = Method::gn;
    std::vector<IterationRecord> records;
    Termination termination = Termination::max_iter;
    bool left_bounds_note = false;  // some iterate left the parameter box
    std::string message;

    const IterationRecord& final_record() const { return records.back(); }
    Vector final_theta() const { return records.back().theta; }
    double final_q() const { return records.back().q; }
};

// The matrix A of the step system A d = grad (P_k = A^{-1}): identity for gd,
// G'WG for gn, the exact Hessian for nr, G'WG + lambda I for lm. For bfgs the
// inverse approximation is maintained inside run(); its seed P_0 = I is
// returned here.
inline Matrix conditioning_matrix(Method method, const MomentModel& model, const WeightingSpec& w,
                                  const Vector& theta, double lm_lambda = 0.0) {
    const Eigen::Index d = theta.size();
    switch (method) {
        case Method::gd:
        case Method::bfgs:
            return Matrix::Identity(d, d);
        case Method::gn:
            return gn_matrix(model, w, theta);
        case Method::nr:
            return full_hessian(model, w, theta);
        case Method::lm:
            return gn_matrix(model, w, theta) + lm_lambda * Matrix::Identity(d, d);
    }
    throw InvalidInputError("conditioning_matrix: unknown method");
}

// Rank-two inverse-Hessian update. Degenerate or negative-curvature pairs
// (s'y <= 1e-12 ||s|| ||y||) skip the update and keep P.
inline Matrix bfgs_update(const Matrix& p, const Vector& s, const Vector& y,
                          bool* skipped = nullptr) {
    const double sy = s.dot(y);
    if (sy <= 1e-12 * s.norm() * y.norm()) {
        if (skipped) *skipped = true;
        return p;
    }
    if (skipped) *skipped = false;
    const double rho = 1.0 / sy;
    const Eigen::Index d = s.size();
    const Matrix m = Matrix::Identity(d, d) - rho * s * y.transpose();
    Matrix out = m * p * m.transpose() + rho * s * s.transpose();
    return 0.5 * (out + out.transpose());
}

namespace detail {

class IterationEngine {
  public:
    IterationEngine(const MomentModel& model, const WeightingSpec& w, const OptimizerConfig& cfg,
                    const std::vector<Vector>* candidates)
        : model_(model), w_(w), cfg_(cfg), candidates_(candidates) {}

    IterationTrace run(const Vector& theta0) {
        cfg_.validate();
        if (theta0.size() != model_.param_dim) {
            throw InvalidInputError("run: starting point dimension mismatch");
        }
        if (!model_.in_bounds(theta0)) {
            throw InvalidInputError("run: starting point outside the parameter box");
        }
        if (candidates_ &&
            static_cast<int>(candidates_->size()) < cfg_.max_iter) {
            throw InvalidInputError("run_global: candidate sequence shorter than max_iter");
        }

        trace_.method = cfg_.method;
        if (cfg_.method == Method::bfgs) {
            p_bfgs_ = Matrix::Identity(model_.param_dim, model_.param_dim);
        }

        Vector theta = theta0;
        ObjectiveReport rep;
        try {
            rep = objective(model_, w_, theta);
        } catch (const EvaluationError&) {
            append(0, theta, std::numeric_limits<double>::quiet_NaN(), 0.0,
                   std::numeric_limits<double>::quiet_NaN(), false);
            return finish(Termination::evaluation_error, "starting point not evaluable");
        }
        append(0, theta, rep.q, 0.0, rep.grad.norm(), false);

        for (int k = 0;; ++k) {
            if (rep.grad.norm() <= cfg_.grad_tol) {
                return finish(Termination::converged, "gradient tolerance reached");
            }
            if (k >= cfg_.max_iter) {
                return finish(Termination::max_iter, "iteration budget exhausted");
            }

            bool local_ok = true;
            std::string local_error;
            Vector theta_local;
            try {
                theta_local = theta - cfg_.gamma * direction(theta, rep);
                if (cfg_.project_to_bounds) {
                    theta_local = theta_local.cwiseMax(model_.lower).cwiseMin(model_.upper);
                }
            } catch (const SingularConditioningError& e) {
                local_ok = false;
                local_error = e.what();
            } catch (const EvaluationError& e) {
                local_ok = false;
                local_error = e.what();
            }

            bool accepted_candidate = false;
            Vector theta_next;
            if (candidates_) {
                theta_next = resolve_global(theta_local, local_ok, (*candidates_)[k],
                                            accepted_candidate);
                if (theta_next.size() == 0) {
                    return finish(Termination::evaluation_error,
                                  "local step and candidate both failed: " + local_error);
                }
            } else {
                if (!local_ok) {
                    return finish(Termination::step_failure, local_error);
                }
                theta_next = theta_local;
            }

            const double step_norm = (theta_next - theta).norm();
            if (!model_.in_bounds(theta_next)) {
                trace_.left_bounds_note = true;
                if (model_.strict_bounds) {
                    append(k + 1, theta_next, std::numeric_limits<double>::quiet_NaN(), step_norm,
                           std::numeric_limits<double>::quiet_NaN(), accepted_candidate);
                    return finish(Termination::left_bounds, "iterate left the parameter box");
                }
            }

            ObjectiveReport rep_next;
            try {
                rep_next = objective(model_, w_, theta_next);
            } catch (const EvaluationError& e) {
                append(k + 1, theta_next, std::numeric_limits<double>::quiet_NaN(), step_norm,
                       std::numeric_limits<double>::quiet_NaN(), accepted_candidate);
                return finish(Termination::evaluation_error, e.what());
            }
            append(k + 1, theta_next, rep_next.q, step_norm, rep_next.grad.norm(),
                   accepted_candidate);

            if (cfg_.method == Method::bfgs) {
                p_bfgs_ = bfgs_update(p_bfgs_, theta_next - theta, rep_next.grad - rep.grad);
            }
            theta = theta_next;
            rep = rep_next;

            if (step_norm <= cfg_.step_tol) {
                return finish(Termination::converged, "step tolerance reached");
            }
        }
    }

  private:
    Vector direction(const Vector& theta, const ObjectiveReport& rep) {
        switch (cfg_.method) {
            case Method::gd:
                return rep.grad;
            case Method::gn:
            case Method::lm:
                return solve_spd(conditioning_matrix(cfg_.method, model_, w_, theta,
                                                     cfg_.lm_lambda),
                                 rep.grad);
            case Method::nr: {
                const Matrix hess = full_hessian(model_, w_, theta);
                return cfg_.nr_require_pd ? solve_spd(hess, rep.grad)
                                          : solve_symmetric(hess, rep.grad);
            }
            case Method::bfgs:
                return p_bfgs_ * rep.grad;
        }
        throw InvalidInputError("run: unknown method");
    }

    // Appendix-style try-catch globalization: whichever of the local step and
    // the k-th candidate has the smaller weighted moment norm wins; a failing
    // local step forfeits to the candidate. Empty return = both failed.
    Vector resolve_global(const Vector& theta_local, bool local_ok, const Vector& candidate,
                          bool& accepted_candidate) {
        double local_norm = std::numeric_limits<double>::infinity();
        if (local_ok) {
            try {
                local_norm = weighted_moment_norm(model_, w_, theta_local);
            } catch (const EvaluationError&) {
            }
        }
        double cand_norm = std::numeric_limits<double>::infinity();
        try {
            cand_norm = weighted_moment_norm(model_, w_, candidate);
        } catch (const EvaluationError&) {
        }
        if (!std::isfinite(local_norm) && !std::isfinite(cand_norm)) return Vector();
        if (cand_norm < local_norm) {
            accepted_candidate = true;
            return candidate;
        }
        return theta_local;
    }

    void append(int k, const Vector& theta, double q, double step_norm, double grad_norm,
                bool accepted) {
        IterationRecord rec;
        rec.k = k;
        rec.theta = theta;
        rec.q = q;
        rec.step_norm = step_norm;
        rec.grad_norm = grad_norm;
        rec.global_accepted = accepted;
        trace_.records.push_back(std::move(rec));
    }

    IterationTrace finish(Termination t, std::string message) {
        trace_.termination = t;
        trace_.message = std::move(message);
        trace_.records.back().status = termination_name(t);
        return std::move(trace_);
    }

    const MomentModel& model_;
    const WeightingSpec& w_;
    OptimizerConfig cfg_;
    const std::vector<Vector>* candidates_;
    Matrix p_bfgs_;
    IterationTrace trace_;
};

}  // namespace detail

inline IterationTrace run(const MomentModel& model, const WeightingSpec& w, const Vector& theta0,
                          const OptimizerConfig& cfg) {
    detail::IterationEngine engine(model, w, cfg, nullptr);
    return engine.run(theta0);
}

// Globalized variant: candidates[k] (typically a shifted Sobol sequence mapped
// into the box) challenges the k-th local step.
inline IterationTrace run_global(const MomentModel& model, const WeightingSpec& w,
                                 const Vector& theta0, const OptimizerConfig& cfg,
                                 const std::vector<Vector>& candidates) {
    detail::IterationEngine engine(model, w, cfg, &candidates);
    return engine.run(theta0);
}

// The candidate sequence described by a GlobalStepSpec: a randomly shifted
// Sobol set stretched over the box.
inline std::vector<Vector> global_candidates(const GlobalStepSpec& spec) {
    if (spec.length < 1) throw InvalidInputError("global_candidates: length must be >= 1");
    if (spec.lower.size() != spec.upper.size() || spec.lower.size() == 0) {
        throw InvalidInputError("global_candidates: bad box");
    }
    const PointSet shifted =
        random_shift(sobol(static_cast<int>(spec.lower.size()), spec.length), spec.shift_seed);
    return map_to_box(shifted, spec.lower, spec.upper);
}

// Convenience overload: builds the candidates from cfg.global_step.
inline IterationTrace run_global(const MomentModel& model, const WeightingSpec& w,
                                 const Vector& theta0, const OptimizerConfig& cfg) {
    if (!cfg.global_step) {
        throw InvalidInputError("run_global: config carries no global step specification");
    }
    GlobalStepSpec spec = *cfg.global_step;
    if (spec.length < cfg.max_iter) spec.length = cfg.max_iter;
    const std::vector<Vector> candidates = global_candidates(spec);
    return run_global(model, w, theta0, cfg, candidates);
}

}  // namespace gmmiter
