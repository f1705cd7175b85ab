#pragma once

// Derivative-free baselines: Nelder-Mead simplex, grid search, simulated
// annealing, and a multi-start driver.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "gmmiter/numerics.hpp"
#include "gmmiter/rng.hpp"

namespace gmmiter {

using ScalarObjective = std::function<double(const Vector&)>;

namespace detail {

inline double checked_objective(const ScalarObjective& f, const Vector& theta) {
    const double value = f(theta);
    if (!std::isfinite(value)) {
        throw EvaluationError("objective returned non-finite value at " + format_point(theta),
                              theta);
    }
    return value;
}

}  // namespace detail

// d+1 affinely independent vertices with objective values, kept sorted
// ascending by value.
struct Simplex {
    std::vector<Vector> vertices;
    std::vector<double> values;

    int dim() const { return static_cast<int>(vertices.size()) - 1; }

    void sort_by_value() {
        std::vector<std::size_t> order(vertices.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [this](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<Vector> v(vertices.size());
        std::vector<double> q(values.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            v[i] = vertices[order[i]];
            q[i] = values[order[i]];
        }
        vertices = std::move(v);
        values = std::move(q);
    }

    // Standard deviation of the vertex values, divisor = vertex count.
    double value_std() const {
        const double n = static_cast<double>(values.size());
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
        double ss = 0.0;
        for (double q : values) ss += (q - mean) * (q - mean);
        return std::sqrt(ss / n);
    }

    static Simplex from_vertices(const ScalarObjective& f, std::vector<Vector> vertices) {
        if (vertices.size() < 2) throw InvalidInputError("Simplex: need at least 2 vertices");
        const Eigen::Index d = vertices[0].size();
        if (vertices.size() != static_cast<std::size_t>(d) + 1) {
            throw InvalidInputError("Simplex: need exactly d+1 vertices");
        }
        Matrix edges(d, d);
        for (Eigen::Index j = 0; j < d; ++j) edges.col(j) = vertices[j + 1] - vertices[0];
        if (std::abs(edges.determinant()) <= 1e-14) {
            throw InvalidInputError("Simplex: vertices not affinely independent");
        }
        Simplex s;
        s.vertices = std::move(vertices);
        s.values.reserve(s.vertices.size());
        for (const Vector& v : s.vertices) s.values.push_back(detail::checked_objective(f, v));
        s.sort_by_value();
        return s;
    }

    // Default construction around a single starting point: theta1 plus
    // per-axis offsets delta_j = 0.05 * max(1, |theta1_j|).
    static Simplex around(const ScalarObjective& f, const Vector& theta1) {
        std::vector<Vector> vertices;
        vertices.push_back(theta1);
        for (Eigen::Index j = 0; j < theta1.size(); ++j) {
            Vector v = theta1;
            v(j) += 0.05 * std::max(1.0, std::abs(theta1(j)));
            vertices.push_back(std::move(v));
        }
        return from_vertices(f, std::move(vertices));
    }
};

struct NelderMeadOptions {
    double alpha = 1.0;
    double gamma_e = 2.0;
    double beta = 0.5;
    double beta_prime = 0.5;
    double tol = 1e-8;  // on the vertex-value standard deviation
    int max_iter = 5000;
};

struct NelderMeadResult {
    Vector best;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> best_value_trace;
};

// Reflection / expansion / reduction / contraction simplex search. The
// reduction step pulls the current worst vertex toward the centroid; full
// contraction shrinks everything toward the best vertex.
inline NelderMeadResult nelder_mead(const ScalarObjective& f, Simplex simplex,
                                    const NelderMeadOptions& opt = {}) {
    const int p = simplex.dim();
    NelderMeadResult result;
    result.best_value_trace.push_back(simplex.values[0]);

    for (int iter = 0; iter < opt.max_iter; ++iter) {
        if (simplex.value_std() < opt.tol) {
            result.converged = true;
            break;
        }
        result.iterations = iter + 1;

        Vector centroid = Vector::Zero(simplex.vertices[0].size());
        for (int l = 0; l < p; ++l) centroid += simplex.vertices[l];
        centroid /= static_cast<double>(p);

        const Vector& worst = simplex.vertices[p];
        const Vector reflected = centroid + opt.alpha * (centroid - worst);
        const double q_r = detail::checked_objective(f, reflected);

        if (q_r < simplex.values[0]) {
            // Expansion.
            const Vector expanded = reflected + (opt.gamma_e - 1.0) * (reflected - centroid);
            const double q_e = detail::checked_objective(f, expanded);
            if (q_e < q_r) {
                simplex.vertices[p] = expanded;
                simplex.values[p] = q_e;
            } else {
                simplex.vertices[p] = reflected;
                simplex.values[p] = q_r;
            }
            simplex.sort_by_value();
        } else if (q_r <= simplex.values[p - 1]) {
            simplex.vertices[p] = reflected;
            simplex.values[p] = q_r;
            simplex.sort_by_value();
        } else {
            // Failed reflection: keep it only if it still beats the worst,
            // then try the reduction point against the (possibly new) worst.
            if (q_r < simplex.values[p]) {
                simplex.vertices[p] = reflected;
                simplex.values[p] = q_r;
            }
            const Vector reduced = centroid + opt.beta * (simplex.vertices[p] - centroid);
            const double q_s = detail::checked_objective(f, reduced);
            if (q_s < simplex.values[p]) {
                simplex.vertices[p] = reduced;
                simplex.values[p] = q_s;
                simplex.sort_by_value();
            } else {
                // Contraction toward the best vertex.
                for (int l = 1; l <= p; ++l) {
                    simplex.vertices[l] =
                        simplex.vertices[0] +
                        opt.beta_prime * (simplex.vertices[l] - simplex.vertices[0]);
                    simplex.values[l] = detail::checked_objective(f, simplex.vertices[l]);
                }
                simplex.sort_by_value();
            }
        }
        result.best_value_trace.push_back(simplex.values[0]);
    }

    result.best = simplex.vertices[0];
    result.value = simplex.values[0];
    return result;
}

inline NelderMeadResult nelder_mead(const ScalarObjective& f, const Vector& theta1,
                                    const NelderMeadOptions& opt = {}) {
    return nelder_mead(f, Simplex::around(f, theta1), opt);
}

struct GridSearchResult {
    Vector argmin;
    double value = 0.0;
    int index = -1;      // position in the grid, lowest on ties
    int failures = 0;    // evaluations skipped on error
    int evaluated = 0;
};

inline GridSearchResult grid_search(const ScalarObjective& f, const std::vector<Vector>& grid) {
    if (grid.empty()) throw InvalidInputError("grid_search: empty grid");
    GridSearchResult result;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double value;
        try {
            value = detail::checked_objective(f, grid[i]);
        } catch (const EvaluationError&) {
            ++result.failures;
            continue;
        }
        ++result.evaluated;
        if (result.index < 0 || value < result.value) {
            result.index = static_cast<int>(i);
            result.value = value;
            result.argmin = grid[i];
        }
    }
    if (result.index < 0) {
        throw EvaluationError("grid_search: every grid evaluation failed", grid.front());
    }
    return result;
}

// Uniform 1-d grid helper: count points on [lo, hi], inclusive endpoints.
inline std::vector<Vector> uniform_grid_1d(double lo, double hi, int count) {
    if (count < 1 || !(lo < hi)) throw InvalidInputError("uniform_grid_1d: bad arguments");
    std::vector<Vector> grid;
    grid.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        grid.push_back(Vector::Constant(1, lo + t * (hi - lo)));
    }
    return grid;
}

// Worst-case point count k >= C * eps^(-p) needed for a grid accuracy of eps
// in dimension p. Reported, never executed.
inline double grid_points_required(double c, double eps, int p) {
    if (!(c > 0.0) || !(eps > 0.0) || p < 1) {
        throw InvalidInputError("grid_points_required: bad arguments");
    }
    return c * std::pow(eps, -p);
}

enum class TemperatureRule { logarithmic, geometric };

struct AnnealingSchedule {
    double t1 = 1.0;
    TemperatureRule rule = TemperatureRule::logarithmic;  // T1/log(l); 0.95^l behind the flag
    double eta_scale = 1.0;                               // proposal variance = eta_scale * T_l
    int budget = 1000;                                    // total chain length k
    std::uint64_t seed = 1;

    void validate() const {
        if (!(t1 > 0.0)) throw InvalidInputError("AnnealingSchedule: T1 must be positive");
        if (!(eta_scale > 0.0)) throw InvalidInputError("AnnealingSchedule: eta must be positive");
        if (budget < 1) throw InvalidInputError("AnnealingSchedule: budget must be >= 1");
    }

    double temperature(int l) const {
        if (rule == TemperatureRule::geometric) return t1 * std::pow(0.95, l);
        return t1 / std::log(static_cast<double>(l));
    }

    double eta(int l) const { return eta_scale * temperature(l); }
};

struct SaRecord {
    int l = 0;
    Vector proposal;
    double q_proposal = 0.0;
    double u = 0.0;
    double temperature = 0.0;
    bool accepted = false;
    Vector position;  // chain state after the step
    double q_position = 0.0;
};

struct SaResult {
    Vector best;
    double best_value = 0.0;
    int best_index = 1;
    int eval_failures = 0;
    std::vector<SaRecord> trace;
};

// Random-walk Metropolis with a cooling schedule. Proposals are
// N(theta_{l-1}, eta_l I); acceptance u <= exp(-dQ/T_l), so improving moves
// always pass. Returns the argmin over the whole visited chain.
inline SaResult simulated_annealing(const ScalarObjective& f, const Vector& theta1,
                                    const AnnealingSchedule& schedule) {
    schedule.validate();
    Rng rng(schedule.seed);

    SaResult result;
    Vector position = theta1;
    double q_position = detail::checked_objective(f, theta1);
    result.best = position;
    result.best_value = q_position;
    result.best_index = 1;
    result.trace.reserve(schedule.budget);

    for (int l = 2; l <= schedule.budget; ++l) {
        SaRecord rec;
        rec.l = l;
        rec.temperature = schedule.temperature(l);
        const double sd = std::sqrt(schedule.eta(l));
        Vector proposal(position.size());
        for (Eigen::Index j = 0; j < position.size(); ++j) {
            proposal(j) = position(j) + sd * rng.normal();
        }
        rec.proposal = proposal;
        rec.u = rng.u01();

        bool eval_ok = true;
        double q_proposal = 0.0;
        try {
            q_proposal = detail::checked_objective(f, proposal);
        } catch (const EvaluationError&) {
            eval_ok = false;
            ++result.eval_failures;
        }
        rec.q_proposal = eval_ok ? q_proposal : std::numeric_limits<double>::quiet_NaN();

        if (eval_ok && rec.u <= std::exp(-(q_proposal - q_position) / rec.temperature)) {
            rec.accepted = true;
            position = proposal;
            q_position = q_proposal;
        }
        rec.position = position;
        rec.q_position = q_position;
        result.trace.push_back(std::move(rec));

        if (q_position < result.best_value) {
            result.best = position;
            result.best_value = q_position;
            result.best_index = l;
        }
    }
    return result;
}

struct StartOutcome {
    Vector start;
    bool ok = false;
    Vector estimate;
    double value = 0.0;
    std::string error;
};

struct MultiStartReport {
    std::vector<StartOutcome> outcomes;
    int crashes = 0;
    int best_index = -1;  // among successes
    Vector best;
    double best_value = 0.0;
};

// Fan an inner optimizer out over a list of starting points. The inner
// closure maps a start to (estimate, value); anything it throws is recorded
// as a crash for that start, mirroring the "# of crashes" accounting.
template <class Inner>
MultiStartReport multi_start(Inner&& inner, const std::vector<Vector>& starts) {
    if (starts.empty()) throw InvalidInputError("multi_start: empty start list");

    MultiStartReport report;
    report.outcomes.resize(starts.size());

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(hw, starts.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> futures;
    futures.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&]() {
            for (std::size_t i = next.fetch_add(1); i < starts.size(); i = next.fetch_add(1)) {
                StartOutcome& out = report.outcomes[i];
                out.start = starts[i];
                try {
                    auto r = inner(starts[i]);
                    out.ok = true;
                    out.estimate = r.first;
                    out.value = r.second;
                } catch (const std::exception& e) {
                    out.ok = false;
                    out.error = e.what();
                }
            }
        }));
    }
    for (auto& fut : futures) fut.get();

    for (std::size_t i = 0; i < report.outcomes.size(); ++i) {
        const StartOutcome& out = report.outcomes[i];
        if (!out.ok) {
            ++report.crashes;
            continue;
        }
        if (report.best_index < 0 || out.value < report.best_value) {
            report.best_index = static_cast<int>(i);
            report.best = out.estimate;
            report.best_value = out.value;
        }
    }
    if (report.best_index < 0) {
        throw EvaluationError("multi_start: every start failed", starts.front());
    }
    return report;
}

}  // namespace gmmiter
