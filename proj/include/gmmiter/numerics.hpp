#pragma once

// Dense small-matrix kernels: singular values, symmetric eigenvalues,
// SPD / symmetric-indefinite solves, finite differences. Everything here is
// pure and reentrant.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace gmmiter {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct InvalidInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Conditioning system singular or indefinite beyond tolerance. Optimizers map
// this to a step failure instead of propagating it.
struct SingularConditioningError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A model evaluation returned a non-finite value; carries the probe point.
struct EvaluationError : std::runtime_error {
    Vector point;
    EvaluationError(const std::string& what, Vector where)
        : std::runtime_error(what), point(std::move(where)) {}
};

namespace detail {

inline void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw InvalidInputError(std::string(what) + ": non-finite entries");
    }
}

inline void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) {
        throw InvalidInputError(std::string(what) + ": non-finite entries");
    }
}

inline std::string format_point(const Vector& v) {
    std::ostringstream os;
    os << "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i > 0) os << ", ";
        os << v(i);
    }
    os << ")";
    return os.str();
}

}  // namespace detail

inline double min_singular_value(const Matrix& m) {
    if (m.size() == 0) throw InvalidInputError("min_singular_value: empty matrix");
    detail::require_finite(m, "min_singular_value");
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    return sv(sv.size() - 1);
}

inline double max_singular_value(const Matrix& m) {
    if (m.size() == 0) throw InvalidInputError("max_singular_value: empty matrix");
    detail::require_finite(m, "max_singular_value");
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

// Eigenvalues of a symmetric matrix, descending. Inputs are symmetrized by
// averaging; asymmetry beyond 1e-10 (relative to scale) is rejected.
inline Vector sym_eigenvalues(const Matrix& s) {
    if (s.rows() != s.cols()) throw InvalidInputError("sym_eigenvalues: non-square matrix");
    detail::require_finite(s, "sym_eigenvalues");
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw InvalidInputError("sym_eigenvalues: matrix not symmetric within tolerance");
    }
    Matrix sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.info() != Eigen::Success) {
        throw InvalidInputError("sym_eigenvalues: eigensolver failed");
    }
    return es.eigenvalues().reverse();
}

inline constexpr double kSpdRankTol = 1e-12;

// Solve Ax = b for symmetric positive definite A. The smallest eigenvalue must
// exceed rank_tol * lambda_max; anything weaker is treated as a conditioning
// failure, not rounded over.
inline Vector solve_spd(const Matrix& a, const Vector& b, double rank_tol = kSpdRankTol) {
    if (a.rows() != a.cols()) throw InvalidInputError("solve_spd: non-square matrix");
    if (a.rows() != b.size()) throw InvalidInputError("solve_spd: size mismatch");
    detail::require_finite(a, "solve_spd");
    detail::require_finite(b, "solve_spd");
    Matrix sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.info() != Eigen::Success) {
        throw SingularConditioningError("solve_spd: eigensolver failed");
    }
    const Vector& ev = es.eigenvalues();  // ascending
    const double lambda_max = ev(ev.size() - 1);
    if (lambda_max <= 0.0 || ev(0) <= rank_tol * lambda_max) {
        throw SingularConditioningError("solve_spd: matrix singular or indefinite beyond tolerance");
    }
    return es.eigenvectors() * (es.eigenvectors().transpose() * b).cwiseQuotient(ev);
}

// Solve Ax = b for symmetric A that may be indefinite. Only near-singular
// systems (|lambda| <= rank_tol * max|lambda|) fail. Newton-Raphson uses this
// so that divergence under an indefinite Hessian is observable.
inline Vector solve_symmetric(const Matrix& a, const Vector& b, double rank_tol = kSpdRankTol) {
    if (a.rows() != a.cols()) throw InvalidInputError("solve_symmetric: non-square matrix");
    if (a.rows() != b.size()) throw InvalidInputError("solve_symmetric: size mismatch");
    detail::require_finite(a, "solve_symmetric");
    detail::require_finite(b, "solve_symmetric");
    Matrix sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.info() != Eigen::Success) {
        throw SingularConditioningError("solve_symmetric: eigensolver failed");
    }
    const Vector& ev = es.eigenvalues();
    const double scale = ev.cwiseAbs().maxCoeff();
    if (scale <= 0.0 || ev.cwiseAbs().minCoeff() <= rank_tol * scale) {
        throw SingularConditioningError("solve_symmetric: matrix singular beyond tolerance");
    }
    return es.eigenvectors() * (es.eigenvectors().transpose() * b).cwiseQuotient(ev);
}

// Step-size rules: h_j = h_scale * max(1, |theta_j|). eps^(1/3) balances
// truncation and round-off for first derivatives, eps^(1/4) for second.
inline double fd_step_first() {
    return std::cbrt(std::numeric_limits<double>::epsilon());
}

inline double fd_step_second() {
    return std::pow(std::numeric_limits<double>::epsilon(), 0.25);
}

namespace detail {

template <class F>
Vector checked_eval(F&& f, const Vector& probe) {
    Vector value = f(probe);
    if (!value.allFinite()) {
        throw EvaluationError("finite difference probe returned non-finite value at " +
                                  format_point(probe),
                              probe);
    }
    return value;
}

template <class F>
double checked_eval_scalar(F&& f, const Vector& probe) {
    double value = f(probe);
    if (!std::isfinite(value)) {
        throw EvaluationError("finite difference probe returned non-finite value at " +
                                  format_point(probe),
                              probe);
    }
    return value;
}

}  // namespace detail

// Central-difference Jacobian of a vector-valued map, column j =
// [f(theta + h_j e_j) - f(theta - h_j e_j)] / (2 h_j).
template <class F>
Matrix finite_diff_jacobian(F&& f, const Vector& theta, double h_scale = fd_step_first()) {
    detail::require_finite(theta, "finite_diff_jacobian");
    const Eigen::Index d = theta.size();
    Matrix jac;
    for (Eigen::Index j = 0; j < d; ++j) {
        const double h = h_scale * std::max(1.0, std::abs(theta(j)));
        Vector hi = theta, lo = theta;
        hi(j) += h;
        lo(j) -= h;
        Vector diff = (detail::checked_eval(f, hi) - detail::checked_eval(f, lo)) / (2.0 * h);
        if (jac.size() == 0) jac.resize(diff.size(), d);
        jac.col(j) = diff;
    }
    return jac;
}

// Symmetric central second differences of a scalar map; output symmetrized.
template <class F>
Matrix finite_diff_hessian(F&& q, const Vector& theta, double h_scale = fd_step_second()) {
    detail::require_finite(theta, "finite_diff_hessian");
    const Eigen::Index d = theta.size();
    Vector h(d);
    for (Eigen::Index j = 0; j < d; ++j) h(j) = h_scale * std::max(1.0, std::abs(theta(j)));

    const double q0 = detail::checked_eval_scalar(q, theta);
    Matrix hess(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        Vector hi = theta, lo = theta;
        hi(i) += h(i);
        lo(i) -= h(i);
        hess(i, i) = (detail::checked_eval_scalar(q, hi) - 2.0 * q0 +
                      detail::checked_eval_scalar(q, lo)) /
                     (h(i) * h(i));
        for (Eigen::Index j = i + 1; j < d; ++j) {
            Vector pp = theta, pm = theta, mp = theta, mm = theta;
            pp(i) += h(i); pp(j) += h(j);
            pm(i) += h(i); pm(j) -= h(j);
            mp(i) -= h(i); mp(j) += h(j);
            mm(i) -= h(i); mm(j) -= h(j);
            const double mixed =
                (detail::checked_eval_scalar(q, pp) - detail::checked_eval_scalar(q, pm) -
                 detail::checked_eval_scalar(q, mp) + detail::checked_eval_scalar(q, mm)) /
                (4.0 * h(i) * h(j));
            hess(i, j) = mixed;
            hess(j, i) = mixed;
        }
    }
    return 0.5 * (hess + hess.transpose());
}

}  // namespace gmmiter
