#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gmmiter/baselines.hpp"

using namespace gmmiter;
using Catch::Approx;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

Vector v2(double x, double y) {
    Vector v(2);
    v << x, y;
    return v;
}

}  // namespace

TEST_CASE("simplex construction validates shape and independence") {
    const ScalarObjective f = [](const Vector& t) { return t.squaredNorm(); };
    CHECK_THROWS_AS(Simplex::from_vertices(f, {v1(0.0)}), InvalidInputError);
    CHECK_THROWS_AS(Simplex::from_vertices(f, {v2(0, 0), v2(1, 1)}), InvalidInputError);
    CHECK_THROWS_AS(Simplex::from_vertices(f, {v2(0, 0), v2(1, 1), v2(2, 2)}), InvalidInputError);

    const Simplex s = Simplex::around(f, v2(3.0, 0.2));
    REQUIRE(s.vertices.size() == 3);
    CHECK(s.dim() == 2);
    // sorted ascending by value
    CHECK(s.values[0] <= s.values[1]);
    CHECK(s.values[1] <= s.values[2]);
}

TEST_CASE("vertex value standard deviation uses the vertex-count divisor") {
    Simplex s;
    s.vertices = {v1(0.0), v1(1.0)};
    s.values = {0.0, 2.0};
    CHECK(s.value_std() == 1.0);
}

TEST_CASE("one reduction step: failed reflection pulls the worst vertex halfway in") {
    std::vector<Vector> probes;
    const ScalarObjective f = [&probes](const Vector& t) {
        probes.push_back(t);
        return t(0) * t(0);
    };
    NelderMeadOptions opt;
    opt.max_iter = 1;
    opt.tol = 1e-300;
    const NelderMeadResult r =
        nelder_mead(f, Simplex::from_vertices(f, {v1(0.0), v1(1.0)}), opt);
    // vertices evaluated, then the reflection at -1 fails and 0.5 is reduced to
    REQUIRE(probes.size() == 4);
    CHECK(probes[0](0) == 0.0);
    CHECK(probes[1](0) == 1.0);
    CHECK(probes[2](0) == -1.0);
    CHECK(probes[3](0) == 0.5);
    CHECK(r.best(0) == 0.0);
    CHECK(r.value == 0.0);
    CHECK(r.iterations == 1);
    CHECK_FALSE(r.converged);
}

TEST_CASE("one expansion step: a winning reflection is pushed twice as far") {
    std::vector<Vector> probes;
    const ScalarObjective f = [&probes](const Vector& t) {
        probes.push_back(t);
        return t(0);
    };
    NelderMeadOptions opt;
    opt.max_iter = 1;
    opt.tol = 1e-300;
    const NelderMeadResult r =
        nelder_mead(f, Simplex::from_vertices(f, {v1(0.0), v1(1.0)}), opt);
    REQUIRE(probes.size() == 4);
    CHECK(probes[2](0) == -1.0);  // reflection, beats the best
    CHECK(probes[3](0) == -2.0);  // expansion, kept
    CHECK(r.best(0) == -2.0);
    CHECK(r.value == -2.0);
}

TEST_CASE("one reflection step: a middling reflection replaces the worst vertex") {
    std::vector<Vector> probes;
    const ScalarObjective f = [&probes](const Vector& t) {
        probes.push_back(t);
        return t.squaredNorm();
    };
    NelderMeadOptions opt;
    opt.max_iter = 1;
    opt.tol = 1e-300;
    const Simplex s = Simplex::from_vertices(f, {v2(0, 0), v2(1, 0), v2(1, 1)});
    const NelderMeadResult r = nelder_mead(f, s, opt);
    REQUIRE(probes.size() == 4);  // three vertices plus the reflection only
    CHECK(probes[3](0) == 0.0);
    CHECK(probes[3](1) == -1.0);
    CHECK(r.best(0) == 0.0);
    CHECK(r.best(1) == 0.0);
}

TEST_CASE("simplex search converges on a two-dimensional quadratic") {
    const ScalarObjective f = [](const Vector& t) {
        return (t(0) - 1.0) * (t(0) - 1.0) + 2.0 * (t(1) + 0.5) * (t(1) + 0.5);
    };
    NelderMeadOptions opt;
    opt.tol = 1e-12;
    const NelderMeadResult r = nelder_mead(f, v2(3.0, 2.0), opt);
    CHECK(r.converged);
    CHECK(r.best(0) == Approx(1.0).margin(1e-5));
    CHECK(r.best(1) == Approx(-0.5).margin(1e-5));
    CHECK(r.value < 1e-9);
    // the running best never worsens
    for (std::size_t i = 1; i < r.best_value_trace.size(); ++i) {
        CHECK(r.best_value_trace[i] <= r.best_value_trace[i - 1]);
    }
}

TEST_CASE("grid search finds exact nodes and reports coverage") {
    const ScalarObjective f = [](const Vector& t) {
        return (t(0) - 0.3) * (t(0) - 0.3);
    };
    const GridSearchResult r = grid_search(f, uniform_grid_1d(0.0, 1.0, 11));
    CHECK(r.index == 3);
    CHECK(r.argmin(0) == Approx(0.3).margin(1e-15));
    CHECK(r.value == Approx(0.0).margin(1e-30));
    CHECK(r.evaluated == 11);
    CHECK(r.failures == 0);
}

TEST_CASE("grid search keeps the lowest index on ties") {
    const ScalarObjective f = [](const Vector&) { return 1.0; };
    const GridSearchResult r = grid_search(f, uniform_grid_1d(0.0, 1.0, 5));
    CHECK(r.index == 0);
}

TEST_CASE("grid search counts skipped evaluations") {
    const ScalarObjective f = [](const Vector& t) {
        if (t(0) < 0.3) throw EvaluationError("left edge", t);
        if (t(0) == 0.5) return std::numeric_limits<double>::quiet_NaN();
        return (t(0) - 0.3) * (t(0) - 0.3);
    };
    const GridSearchResult r = grid_search(f, uniform_grid_1d(0.0, 1.0, 5));
    CHECK(r.failures == 3);
    CHECK(r.evaluated == 2);
    CHECK(r.index == 3);
    CHECK(r.argmin(0) == 0.75);

    const ScalarObjective all_fail = [](const Vector& t) -> double {
        throw EvaluationError("no", t);
    };
    CHECK_THROWS_AS(grid_search(all_fail, uniform_grid_1d(0.0, 1.0, 3)), EvaluationError);
    CHECK_THROWS_AS(grid_search(f, std::vector<Vector>{}), InvalidInputError);
}

TEST_CASE("uniform 1-d grids hit both endpoints") {
    const std::vector<Vector> g = uniform_grid_1d(-0.9, 0.9, 7);
    REQUIRE(g.size() == 7);
    CHECK(g.front()(0) == -0.9);
    CHECK(g.back()(0) == 0.9);
    CHECK(uniform_grid_1d(2.0, 3.0, 1)[0](0) == 2.0);
    CHECK_THROWS_AS(uniform_grid_1d(0.0, 1.0, 0), InvalidInputError);
    CHECK_THROWS_AS(uniform_grid_1d(1.0, 0.0, 3), InvalidInputError);
}

TEST_CASE("worst-case grid size follows the stated power law") {
    CHECK(grid_points_required(2.0, 0.1, 3) == Approx(2000.0));
    CHECK(grid_points_required(1.0, 0.01, 2) == Approx(10000.0));
    CHECK_THROWS_AS(grid_points_required(0.0, 0.1, 2), InvalidInputError);
    CHECK_THROWS_AS(grid_points_required(1.0, 0.1, 0), InvalidInputError);
}

TEST_CASE("annealing schedule temperatures") {
    AnnealingSchedule sched;
    sched.t1 = 2.0;
    CHECK(sched.temperature(2) == 2.0 / std::log(2.0));
    CHECK(sched.temperature(10) == 2.0 / std::log(10.0));
    sched.rule = TemperatureRule::geometric;
    CHECK(sched.temperature(3) == 2.0 * std::pow(0.95, 3));
    CHECK(sched.eta(3) == sched.eta_scale * sched.temperature(3));

    sched.t1 = 0.0;
    CHECK_THROWS_AS(sched.validate(), InvalidInputError);
    sched.t1 = 1.0;
    sched.budget = 0;
    CHECK_THROWS_AS(sched.validate(), InvalidInputError);
}

TEST_CASE("annealing accepts every improving move and tracks the chain argmin") {
    const ScalarObjective f = [](const Vector& t) {
        const double s = t(0) * t(0) - 1.0;
        return s * s;
    };
    AnnealingSchedule sched;
    sched.t1 = 1.0;
    sched.rule = TemperatureRule::geometric;
    sched.eta_scale = 0.5;
    sched.budget = 200;
    sched.seed = 4;
    const SaResult r = simulated_annealing(f, v1(0.0), sched);
    REQUIRE(r.trace.size() == 199);

    double q_prev = f(v1(0.0));
    double running_best = q_prev;
    for (const SaRecord& rec : r.trace) {
        if (!std::isnan(rec.q_proposal) && rec.q_proposal <= q_prev) CHECK(rec.accepted);
        if (rec.accepted) {
            CHECK(rec.q_position == rec.q_proposal);
        } else {
            CHECK(rec.q_position == q_prev);
        }
        q_prev = rec.q_position;
        running_best = std::min(running_best, rec.q_position);
        CHECK(r.best_value <= rec.q_position);
    }
    CHECK(r.best_value == running_best);
    CHECK(r.best_value <= f(v1(0.0)));
    CHECK(f(r.best) == r.best_value);
    CHECK(r.eval_failures == 0);
}

TEST_CASE("annealing is deterministic in the seed and counts failed proposals") {
    const ScalarObjective f = [](const Vector& t) -> double {
        if (std::abs(t(0)) > 0.4) throw EvaluationError("outside", t);
        return t(0) * t(0);
    };
    AnnealingSchedule sched;
    sched.t1 = 1.0;
    sched.eta_scale = 1.0;
    sched.budget = 120;
    sched.seed = 9;
    const SaResult a = simulated_annealing(f, v1(0.0), sched);
    const SaResult b = simulated_annealing(f, v1(0.0), sched);
    CHECK(a.best(0) == b.best(0));
    CHECK(a.best_value == b.best_value);
    CHECK(a.best_index == b.best_index);
    CHECK(a.eval_failures == b.eval_failures);
    CHECK(a.eval_failures > 0);

    int nan_count = 0;
    for (const SaRecord& rec : a.trace) {
        if (std::isnan(rec.q_proposal)) {
            ++nan_count;
            CHECK_FALSE(rec.accepted);
        }
        CHECK(std::abs(rec.position(0)) <= 0.4);  // chain never moves to a failed point
    }
    CHECK(nan_count == a.eval_failures);
}

TEST_CASE("annealing with a unit budget returns the start") {
    const ScalarObjective f = [](const Vector& t) { return t.squaredNorm(); };
    AnnealingSchedule sched;
    sched.budget = 1;
    const SaResult r = simulated_annealing(f, v1(0.7), sched);
    CHECK(r.trace.empty());
    CHECK(r.best(0) == 0.7);
    CHECK(r.best_index == 1);
}

TEST_CASE("multi_start records crashes and the best surviving start") {
    const auto inner = [](const Vector& start) -> std::pair<Vector, double> {
        if (start(0) > 0.5) throw std::runtime_error("blew up");
        return {start, (start(0) - 0.15) * (start(0) - 0.15)};
    };
    const std::vector<Vector> starts = {v1(0.4), v1(0.1), v1(0.9)};
    const MultiStartReport r = multi_start(inner, starts);
    CHECK(r.crashes == 1);
    CHECK_FALSE(r.outcomes[2].ok);
    CHECK_FALSE(r.outcomes[2].error.empty());
    CHECK(r.outcomes[0].ok);
    CHECK(r.best_index == 1);
    CHECK(r.best(0) == 0.1);
    CHECK(r.best_value == Approx(0.0025).margin(1e-15));
}

TEST_CASE("multi_start keeps the first of tied minima and validates input") {
    const auto inner = [](const Vector& start) -> std::pair<Vector, double> {
        return {start, (start(0) - 0.5) * (start(0) - 0.5)};
    };
    const MultiStartReport r = multi_start(inner, {v1(0.25), v1(0.75)});
    CHECK(r.best_index == 0);  // exact value tie, lowest index wins

    CHECK_THROWS_AS(multi_start(inner, {}), InvalidInputError);
    const auto always_throw = [](const Vector&) -> std::pair<Vector, double> {
        throw std::runtime_error("no");
    };
    CHECK_THROWS_AS(multi_start(always_throw, {v1(0.0), v1(0.1)}), EvaluationError);
}
