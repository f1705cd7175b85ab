#pragma once

// Worked models: MA(1) indirect inference through an AR(p) auxiliary
// regression, the Gaussian three-moment example, and the cube-root
// counterexample where the rank condition fails at the minimizer.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gmmiter/model.hpp"
#include "gmmiter/numerics.hpp"
#include "gmmiter/rng.hpp"

namespace gmmiter {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct MA1Spec {
    double theta_true = -0.5;
    int n = 200;
    int p = 1;
    std::uint64_t seed = 1;

    void validate() const {
        if (!(std::abs(theta_true) < 1.0)) throw InvalidInputError("MA1Spec: |theta_true| must be < 1");
        if (p < 1) throw InvalidInputError("MA1Spec: p must be >= 1");
        if (n <= p + 10) throw InvalidInputError("MA1Spec: n must exceed p + 10");
    }
};

// y_t = e_t - theta e_{t-1}, e_t iid N(0,1), stationary start (e_0 drawn).
inline std::vector<double> simulate_ma1(const MA1Spec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    std::vector<double> y(spec.n);
    double e_prev = rng.normal();
    for (int t = 0; t < spec.n; ++t) {
        const double e = rng.normal();
        y[t] = e - spec.theta_true * e_prev;
        e_prev = e;
    }
    return y;
}

namespace detail {

// Conditional OLS of y_t on (y_{t-1}, ..., y_{t-p}), no intercept, first p
// observations discarded. Returns the Gram matrix and cross products too so
// the covariance estimate can reuse them.
struct ArFit {
    Vector beta;
    Matrix xtx;      // X'X
    double sigma_u2; // residual variance, SSR / n_obs
    int n_obs;
};

inline ArFit fit_ar_detail(const std::vector<double>& series, int p) {
    const int n = static_cast<int>(series.size());
    if (n <= p + 1) throw InvalidInputError("fit_ar: series too short for the requested order");
    const int n_obs = n - p;
    Matrix x(n_obs, p);
    Vector y(n_obs);
    for (int t = p; t < n; ++t) {
        y(t - p) = series[t];
        for (int j = 0; j < p; ++j) x(t - p, j) = series[t - 1 - j];
    }
    ArFit fit;
    fit.n_obs = n_obs;
    fit.xtx = x.transpose() * x;
    fit.beta = solve_spd(fit.xtx, x.transpose() * y);  // singular Gram -> conditioning error
    const Vector resid = y - x * fit.beta;
    fit.sigma_u2 = resid.squaredNorm() / n_obs;
    return fit;
}

}  // namespace detail

inline Vector fit_ar(const std::vector<double>& series, int p) {
    return detail::fit_ar_detail(series, p).beta;
}

// n * var-hat(beta-hat) under homoskedasticity: sigma_u^2 * (X'X/n_obs)^{-1}.
inline Matrix ar_coefficient_covariance(const std::vector<double>& series, int p) {
    const detail::ArFit fit = detail::fit_ar_detail(series, p);
    Matrix v(p, p);
    const Matrix xtx_n = fit.xtx / static_cast<double>(fit.n_obs);
    for (int j = 0; j < p; ++j) {
        v.col(j) = solve_spd(xtx_n, Vector::Unit(p, j));
    }
    v *= fit.sigma_u2;
    return 0.5 * (v + v.transpose());
}

// Population AR(p) projection coefficients of the MA(1): the p x p Toeplitz
// Yule-Walker system with autocovariances gamma_0 = 1+theta^2,
// gamma_1 = -theta, gamma_k = 0 for k >= 2.
inline Vector ma1_binding(double theta, int p) {
    if (!(std::abs(theta) < 1.0)) throw DomainError("ma1_binding: theta outside (-1, 1)");
    if (p < 1) throw InvalidInputError("ma1_binding: p must be >= 1");
    const double g0 = 1.0 + theta * theta;
    const double g1 = -theta;
    if (p == 1) {
        return Vector::Constant(1, g1 / g0);  // -theta / (1 + theta^2)
    }
    Matrix t = Matrix::Zero(p, p);
    for (int i = 0; i < p; ++i) {
        t(i, i) = g0;
        if (i + 1 < p) {
            t(i, i + 1) = g1;
            t(i + 1, i) = g1;
        }
    }
    Vector r = Vector::Zero(p);
    r(0) = g1;
    return solve_spd(t, r);
}

// d beta / d theta, from differentiating the Yule-Walker system:
// T beta' = r' - T' beta. Closed form for p = 1.
inline Vector ma1_binding_jacobian(double theta, int p) {
    if (!(std::abs(theta) < 1.0)) throw DomainError("ma1_binding_jacobian: theta outside (-1, 1)");
    if (p == 1) {
        const double d = 1.0 + theta * theta;
        return Vector::Constant(1, -(1.0 - theta * theta) / (d * d));
    }
    const double g0 = 1.0 + theta * theta;
    const double g1 = -theta;
    Matrix t = Matrix::Zero(p, p);
    Matrix dt = Matrix::Zero(p, p);
    for (int i = 0; i < p; ++i) {
        t(i, i) = g0;
        dt(i, i) = 2.0 * theta;
        if (i + 1 < p) {
            t(i, i + 1) = g1;
            t(i + 1, i) = g1;
            dt(i, i + 1) = -1.0;
            dt(i + 1, i) = -1.0;
        }
    }
    Vector r = Vector::Zero(p);
    r(0) = g1;
    Vector dr = Vector::Zero(p);
    dr(0) = -1.0;
    const Vector beta = solve_spd(t, r);
    return solve_spd(t, Vector(dr - dt * beta));
}

struct BindingFunction {
    int p = 1;
    Vector operator()(double theta) const { return ma1_binding(theta, p); }
    Vector derivative(double theta) const { return ma1_binding_jacobian(theta, p); }
};

namespace detail {

inline MomentModel ma1_model_from_beta(Vector beta_hat, int p, std::string name) {
    MomentModel model;
    model.name = std::move(name);
    model.param_dim = 1;
    model.moment_dim = p;
    model.lower = Vector::Constant(1, -0.99);
    model.upper = Vector::Constant(1, 0.99);
    model.moments = [beta_hat = std::move(beta_hat), p](const Vector& theta) -> Vector {
        if (!(std::abs(theta(0)) < 1.0)) {
            throw EvaluationError("ma1 moments: binding function undefined at " +
                                      format_point(theta),
                                  theta);
        }
        return beta_hat - ma1_binding(theta(0), p);
    };
    model.jacobian = [p](const Vector& theta) -> Matrix {
        if (!(std::abs(theta(0)) < 1.0)) {
            throw EvaluationError("ma1 jacobian: binding function undefined at " +
                                      format_point(theta),
                                  theta);
        }
        return -ma1_binding_jacobian(theta(0), p);
    };
    return model;
}

}  // namespace detail

struct MA1Model {
    MomentModel model;
    WeightingSpec weighting;
    Vector beta_hat;
    Matrix v_hat;                // empty for identity weighting
    std::vector<double> series;
};

// Simulate, fit the AR(p) auxiliary regression, and assemble the indirect-
// inference moment model g(theta) = beta-hat - beta(theta).
inline MA1Model ma1_moment_model(const MA1Spec& spec,
                                 WeightKind weighting = WeightKind::identity) {
    MA1Model out;
    out.series = simulate_ma1(spec);
    out.beta_hat = fit_ar(out.series, spec.p);
    out.model = detail::ma1_model_from_beta(out.beta_hat, spec.p, "ma1-seeded");
    if (weighting == WeightKind::inverse_covariance) {
        out.v_hat = ar_coefficient_covariance(out.series, spec.p);
        out.weighting = WeightingSpec::inverse_covariance(out.v_hat);
    } else {
        out.weighting = WeightingSpec::identity(spec.p);
    }
    return out;
}

// Seed-free p=1 variant: beta1-hat is chosen so the moment has its root
// exactly at theta_hat. The default reproduces the reference iteration table
// (beta1-hat = 0.339/(1+0.339^2) with root -0.339).
inline MomentModel ma1_calibrated_model(double theta_hat = -0.339) {
    Vector beta_hat = ma1_binding(theta_hat, 1);
    return detail::ma1_model_from_beta(std::move(beta_hat), 1, "ma1-calibrated");
}

// Frozen p=12 sample used by the reference diagnostics: the seed is pinned so
// the grid-search minimizer sits on a node of the audit grid and the identity
// versus optimal weighting verdicts split as documented.
inline constexpr std::uint64_t kReferenceMa1Seed = 23;

inline MA1Spec reference_ma1_spec() {
    MA1Spec spec;
    spec.theta_true = -0.5;
    spec.n = 200;
    spec.p = 12;
    spec.seed = kReferenceMa1Seed;
    return spec;
}

inline constexpr double kGaussianSigma2Floor = 1e-8;

namespace detail {

inline MomentModel gaussian_model_from_targets(Vector mu_hat, std::string name) {
    MomentModel model;
    model.name = std::move(name);
    model.param_dim = 2;   // (mu, sigma^2)
    model.moment_dim = 3;
    model.lower = Vector(2);
    model.upper = Vector(2);
    model.lower << -10.0, kGaussianSigma2Floor;
    model.upper << 10.0, 10.0;
    model.moments = [mu_hat = std::move(mu_hat)](const Vector& theta) -> Vector {
        const double mu = theta(0), s2 = theta(1);
        if (s2 <= 0.0) {
            throw EvaluationError("gaussian moments: sigma^2 must be positive at " +
                                      format_point(theta),
                                  theta);
        }
        Vector g(3);
        g(0) = mu_hat(0) - mu;
        g(1) = mu_hat(1) - s2;
        g(2) = mu_hat(2) - 3.0 * s2 * s2;
        return g;
    };
    model.jacobian = [](const Vector& theta) -> Matrix {
        Matrix g(3, 2);
        g << -1.0, 0.0,
              0.0, -1.0,
              0.0, -6.0 * theta(1);
        return g;
    };
    return model;
}

}  // namespace detail

// Three-moment Gaussian model, population mode: targets fixed at
// (mu, sigma^2, 3 sigma^4) of the true parameter.
inline MomentModel gaussian_moment_model(double mu_true, double sigma2_true) {
    if (sigma2_true <= 0.0) throw DomainError("gaussian_moment_model: sigma^2 must be positive");
    Vector mu_hat(3);
    mu_hat << mu_true, sigma2_true, 3.0 * sigma2_true * sigma2_true;
    return detail::gaussian_model_from_targets(std::move(mu_hat), "gaussian-population");
}

// Sample mode: targets are the raw first, second, and fourth data moments.
inline MomentModel gaussian_moment_model(const std::vector<double>& data) {
    if (data.size() < 2) throw InvalidInputError("gaussian_moment_model: need at least 2 observations");
    double m1 = 0.0, m2 = 0.0, m4 = 0.0;
    for (double y : data) {
        m1 += y;
        m2 += y * y;
        m4 += y * y * y * y;
    }
    const double n = static_cast<double>(data.size());
    Vector mu_hat(3);
    mu_hat << m1 / n, m2 / n, m4 / n;
    return detail::gaussian_model_from_targets(std::move(mu_hat), "gaussian-sample");
}

// g(theta) = (ybar - theta)^3. G vanishes at the minimizer, so the rank
// condition fails even locally; gradient descent stalls at a cube-root rate
// while Gauss-Newton keeps its geometric rate.
inline MomentModel cube_root_model(double ybar) {
    if (!std::isfinite(ybar)) throw InvalidInputError("cube_root_model: ybar must be finite");
    MomentModel model;
    model.name = "cube-root";
    model.param_dim = 1;
    model.moment_dim = 1;
    model.lower = Vector::Constant(1, ybar - 10.0);
    model.upper = Vector::Constant(1, ybar + 10.0);
    model.moments = [ybar](const Vector& theta) -> Vector {
        const double u = ybar - theta(0);
        return Vector::Constant(1, u * u * u);
    };
    model.jacobian = [ybar](const Vector& theta) -> Matrix {
        const double u = ybar - theta(0);
        return Matrix::Constant(1, 1, -3.0 * u * u);
    };
    return model;
}

}  // namespace gmmiter
