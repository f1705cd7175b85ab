#pragma once

// Moment-condition abstraction: sample moments g(theta), Jacobian G(theta),
// weighting matrix W, and the GMM objective Q(theta) = (1/2) g'Wg together
// with its gradient G'Wg and Hessian.

#include <functional>
#include <string>
#include <utility>

#include "gmmiter/numerics.hpp"

namespace gmmiter {

enum class WeightKind { identity, fixed, inverse_covariance };

struct WeightingSpec {
    WeightKind kind = WeightKind::identity;
    Matrix w;  // realized m x m matrix

    static WeightingSpec identity(int m) {
        WeightingSpec spec;
        spec.kind = WeightKind::identity;
        spec.w = Matrix::Identity(m, m);
        return spec;
    }

    static WeightingSpec fixed(Matrix w) {
        WeightingSpec spec;
        spec.kind = WeightKind::fixed;
        spec.w = std::move(w);
        validate(spec.w);
        return spec;
    }

    // Optimal weighting W = V^{-1} for a moment covariance V.
    static WeightingSpec inverse_covariance(const Matrix& v) {
        validate(v);
        WeightingSpec spec;
        spec.kind = WeightKind::inverse_covariance;
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (v + v.transpose()));
        spec.w = es.eigenvectors() *
                 es.eigenvalues().cwiseInverse().asDiagonal() *
                 es.eigenvectors().transpose();
        Matrix sym = 0.5 * (spec.w + spec.w.transpose());  // transpose aliases spec.w
        spec.w = std::move(sym);
        return spec;
    }

  private:
    static void validate(const Matrix& w) {
        if (w.rows() != w.cols()) throw InvalidInputError("weighting matrix must be square");
        detail::require_finite(w, "weighting matrix");
        const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
        if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
            throw InvalidInputError("weighting matrix must be symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (w + w.transpose()));
        if (es.eigenvalues()(0) <= 0.0) {
            throw InvalidInputError("weighting matrix must be positive definite");
        }
    }
};

struct MomentModel {
    std::string name;
    int param_dim = 0;   // d
    int moment_dim = 0;  // m >= d
    std::function<Vector(const Vector&)> moments;
    std::function<Matrix(const Vector&)> jacobian;  // optional; finite differences otherwise
    Vector lower, upper;                            // parameter box
    bool strict_bounds = false;  // refuse evaluation outside the box

    bool over_identified() const { return moment_dim > param_dim; }

    bool in_bounds(const Vector& theta) const {
        for (Eigen::Index j = 0; j < theta.size(); ++j) {
            if (theta(j) < lower(j) || theta(j) > upper(j)) return false;
        }
        return true;
    }

    Vector eval_moments(const Vector& theta) const {
        if (strict_bounds && !in_bounds(theta)) {
            throw EvaluationError(name + ": evaluation outside the parameter bounds at " +
                                      detail::format_point(theta),
                                  theta);
        }
        Vector g = moments(theta);
        if (!g.allFinite()) {
            throw EvaluationError(name + ": non-finite moments at " + detail::format_point(theta),
                                  theta);
        }
        return g;
    }

    Matrix eval_jacobian(const Vector& theta) const {
        if (jacobian) {
            Matrix g = jacobian(theta);
            if (!g.allFinite()) {
                throw EvaluationError(name + ": non-finite Jacobian at " +
                                          detail::format_point(theta),
                                      theta);
            }
            return g;
        }
        return finite_diff_jacobian([this](const Vector& t) { return eval_moments(t); }, theta);
    }
};

struct ObjectiveReport {
    double q = 0.0;              // (1/2) g'Wg
    Vector g;                     // moments
    Vector grad;                  // G'Wg
    double weighted_norm = 0.0;  // sqrt(g'Wg)
};

inline ObjectiveReport objective(const MomentModel& model, const WeightingSpec& w,
                                 const Vector& theta) {
    ObjectiveReport report;
    report.g = model.eval_moments(theta);
    const Vector wg = w.w * report.g;
    const double gwg = report.g.dot(wg);
    report.q = 0.5 * gwg;
    report.weighted_norm = std::sqrt(std::max(0.0, gwg));
    report.grad = model.eval_jacobian(theta).transpose() * wg;
    return report;
}

// Weighted moment norm ||g(theta)||_W alone, without Jacobian work.
inline double weighted_moment_norm(const MomentModel& model, const WeightingSpec& w,
                                   const Vector& theta) {
    const Vector g = model.eval_moments(theta);
    return std::sqrt(std::max(0.0, g.dot(w.w * g)));
}

// G'WG, the un-inverted Gauss-Newton conditioning matrix. Symmetric PSD.
inline Matrix gn_matrix(const MomentModel& model, const WeightingSpec& w, const Vector& theta) {
    const Matrix g = model.eval_jacobian(theta);
    Matrix out = g.transpose() * w.w * g;
    return 0.5 * (out + out.transpose());
}

// Exact Hessian of Q (half convention), computed by central-differencing the
// gradient G'Wg. Differencing the first derivative keeps the truncation error
// near 1e-9 where second-differencing the objective would lose three digits.
inline Matrix full_hessian(const MomentModel& model, const WeightingSpec& w, const Vector& theta) {
    const Eigen::Index d = theta.size();
    const double h_scale = fd_step_first();
    Matrix hess(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const double h = h_scale * std::max(1.0, std::abs(theta(j)));
        Vector hi = theta, lo = theta;
        hi(j) += h;
        lo(j) -= h;
        hess.col(j) = (objective(model, w, hi).grad - objective(model, w, lo).grad) / (2.0 * h);
    }
    return 0.5 * (hess + hess.transpose());
}

}  // namespace gmmiter
