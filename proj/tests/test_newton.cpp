#include <doctest.h>

#include <cmath>

#include "mmdn/newton.hpp"
#include "mmdn/rng.hpp"
#include "mmdn/tolerances.hpp"
#include "oracles.hpp"

using namespace mmdn;

namespace {

const KernelSpec kGauss1{KernelFamily::Gaussian, 1.0};

// identity objective map with no constraints, for manufactured states
ProblemDef identity_problem(double lo = -5.0, double hi = 5.0, bool with_box = false) {
    ProblemDef p;
    p.name = "identity";
    p.n = 2;
    p.k = 2;
    p.lower = {lo, lo};
    p.upper = {hi, hi};
    p.evaluate = [](const Vec& x) { return x; };
    p.jacobian = [](const Vec&) { return Matrix::identity(2); };
    p.hessian_tensor = [](const Vec&) { return std::vector<Matrix>(2, Matrix(2, 2)); };
    if (with_box) p.inequalities = problems::box_constraints(p);
    return p;
}

}  // namespace

TEST_CASE("detect_active: interior, face, and brute-force agreement") {
    const auto p = problems::make_problem("toy-biobj");
    const StackedDecision interior(2, 2, {0.0, 0.0, 1.0, -1.0});
    CHECK(newton::detect_active(interior, p, 1e-6).empty());

    const StackedDecision on_face(1, 2, {2.0, 0.0});
    const auto act = newton::detect_active(on_face, p, 1e-6);
    REQUIRE(act.size() == 1);
    CHECK(act[0].point == 0);
    CHECK(act[0].constraint == 1);  // x0 - upper0

    SplitMix64 rng(3);
    for (int t = 0; t < 20; ++t) {
        StackedDecision x(3, 2,
                          {rng.uniform(-2.2, 2.2), rng.uniform(-2.2, 2.2), rng.uniform(-2.2, 2.2),
                           rng.uniform(-2.2, 2.2), rng.uniform(-2.2, 2.2), rng.uniform(-2.2, 2.2)});
        const double tol = 0.05;
        const auto got = newton::detect_active(x, p, tol);
        std::vector<ActivePair> want;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < p.inequalities.size(); ++j)
                if (p.inequalities[j].value(x.point(i)) > -tol) want.push_back({i, j});
        CHECK(got == want);
    }
}

TEST_CASE("kkt_residual: unconstrained equals the gradient exactly") {
    SplitMix64 rng(4);
    const ProblemDef p = identity_problem();
    NewtonState state;
    state.x = StackedDecision(2, 2, {0.3, 0.4, -0.2, 0.9});
    const PointSet r = oracle::random_point_set(rng, 3, 2);
    const Vec res = newton::kkt_residual(state, p, r, kGauss1);
    const Vec grad = mmd::grad_decision(state.x, p, r, kGauss1);
    REQUIRE(res.size() == grad.size());
    for (std::size_t i = 0; i < res.size(); ++i) CHECK(res[i] == grad[i]);
}

TEST_CASE("kkt_residual: stationary feasible state has zero residual") {
    const ProblemDef p = identity_problem();
    NewtonState state;
    state.x = StackedDecision(3, 2, {0.0, 0.0, 1.0, 0.0, -1.0, 0.0});
    const PointSet r{{{0.0, 1.0}, {0.0, -1.0}}};
    const Vec res = newton::kkt_residual(state, p, r, kGauss1);
    // the symmetric point's rows vanish; other rows are nonzero, so check row 0
    CHECK(std::fabs(res[0]) <= 1e-10);
    CHECK(std::fabs(res[1]) <= 1e-10);
}

TEST_CASE("kkt_residual: top block matches independent dense assembly") {
    SplitMix64 rng(5);
    const auto p = problems::make_problem("toy-biobj");
    NewtonState state;
    state.x = StackedDecision(2, 2, {1.999999999, 0.5, -2.0, 0.1});
    state.active = newton::detect_active(state.x, p, 1e-6);
    REQUIRE(state.active.size() == 2);
    state.lambda = {0.7, -0.3};
    const PointSet r = oracle::random_point_set(rng, 3, 2, 0.0, 4.0);

    const Vec res = newton::kkt_residual(state, p, r, kGauss1);
    const Vec grad = mmd::grad_decision(state.x, p, r, kGauss1);

    // dense oracle: J' lambda accumulated constraint by constraint
    Vec want = grad;
    std::size_t c = 0;
    for (const auto& a : state.active) {
        const Vec g = p.inequalities[a.constraint].gradient(state.x.point(a.point));
        for (std::size_t d = 0; d < 2; ++d) want[a.point * 2 + d] += g[d] * state.lambda[c];
        ++c;
    }
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::fabs(res[i] - want[i]) <= 1e-12);
    // bottom block carries the active constraint values
    CHECK(res[4] == doctest::Approx(state.x.data[0] - 2.0));
    CHECK(res[5] == doctest::Approx(-2.0 - state.x.data[2]));
}

TEST_CASE("kkt_derivative: S vanishes for linear constraints") {
    SplitMix64 rng(6);
    const auto p = problems::make_problem("toy-biobj");
    NewtonState state;
    state.x = StackedDecision(1, 2, {2.0, 0.3});
    state.active = newton::detect_active(state.x, p, 1e-6);
    REQUIRE(state.active.size() == 1);
    state.lambda = {1.3};
    const PointSet r = oracle::random_point_set(rng, 3, 2, 0.0, 4.0);

    const Matrix d = newton::kkt_derivative(state, p, r, kGauss1);
    const Matrix h = mmd::hess_decision(state.x, p, r, kGauss1);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(d(i, j) == h(i, j));
    // constraint row/column
    CHECK(d(2, 0) == 1.0);
    CHECK(d(0, 2) == 1.0);
    CHECK(d(2, 2) == 0.0);
}

TEST_CASE("kkt_derivative: quadratic equality contributes S = sum lambda_j 2I") {
    SplitMix64 rng(7);
    ProblemDef p = identity_problem();
    ConstraintFn sphere;
    sphere.value = [](const Vec& x) { return x[0] * x[0] + x[1] * x[1] - 1.0; };
    sphere.gradient = [](const Vec& x) { return Vec{2.0 * x[0], 2.0 * x[1]}; };
    sphere.hessian = [](const Vec&) {
        Matrix h(2, 2);
        h(0, 0) = 2.0;
        h(1, 1) = 2.0;
        return h;
    };
    p.equalities.push_back(sphere);

    NewtonState state;
    state.x = StackedDecision(2, 2, {0.8, 0.6, -0.6, 0.8});
    state.lambda = {0.4, -0.9};
    const PointSet r = oracle::random_point_set(rng, 3, 2);

    const Matrix d = newton::kkt_derivative(state, p, r, kGauss1);
    const Matrix h = mmd::hess_decision(state.x, p, r, kGauss1);
    for (std::size_t pt = 0; pt < 2; ++pt)
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) {
                const double want = h(pt * 2 + i, pt * 2 + j) +
                                    (i == j ? 2.0 * state.lambda[pt] : 0.0);
                CHECK(d(pt * 2 + i, pt * 2 + j) == doctest::Approx(want));
            }

    // finite differences of the residual in X confirm the S block
    const std::size_t dim = 4;
    const double step = 1e-6;
    for (std::size_t c = 0; c < dim; ++c) {
        NewtonState sp = state, sm = state;
        sp.x.data[c] += step;
        sm.x.data[c] -= step;
        const Vec rp = newton::kkt_residual(sp, p, r, kGauss1);
        const Vec rm = newton::kkt_residual(sm, p, r, kGauss1);
        for (std::size_t rr = 0; rr < rp.size(); ++rr)
            CHECK(std::fabs((rp[rr] - rm[rr]) / (2.0 * step) - d(rr, c)) <= 1e-4);
    }
}

TEST_CASE("precondition: pinned traces") {
    Matrix a(2, 2);
    a(0, 0) = -1.0;
    a(1, 1) = 2.0;
    const auto r1 = newton::precondition(a);
    CHECK(r1.attempts == 2);
    CHECK(r1.tau == 1.0 + 1e-6);

    Matrix spd(2, 2);
    spd(0, 0) = 3.0;
    spd(1, 1) = 1.0;
    spd(0, 1) = 0.5;
    spd(1, 0) = 0.5;
    const auto r2 = newton::precondition(spd);
    CHECK(r2.attempts == 1);
    CHECK(r2.tau == 0.0);

    const Matrix zero(3, 3);
    const auto r3 = newton::precondition(zero);
    CHECK(r3.attempts == 2);
    CHECK(r3.tau == 1e-6);

    // factored matrix equals input + tau*I
    Matrix shifted = a;
    shifted(0, 0) += r1.tau;
    shifted(1, 1) += r1.tau;
    const Matrix rec = linalg::matmul(r1.cholesky_factor, linalg::transpose(r1.cholesky_factor));
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(std::fabs(rec.data()[i] - shifted.data()[i]) <= 1e-10);
}

TEST_CASE("precondition: indefinite with positive diagonal still escalates") {
    Matrix a(2, 2);
    a(0, 0) = 1.0;
    a(0, 1) = 2.0;
    a(1, 0) = 2.0;
    a(1, 1) = 1.0;
    const auto r = newton::precondition(a);
    CHECK(r.tau > 0.0);
    CHECK(linalg::cholesky([&] {
              Matrix s = a;
              s(0, 0) += r.tau;
              s(1, 1) += r.tau;
              return s;
          }())
              .has_value());
}

TEST_CASE("armijo_backtrack: quadratic accepts the full step") {
    const auto merit = [](const Vec& x) { return x[0] * x[0] + x[1] * x[1]; };
    const auto r = newton::armijo_backtrack(merit, {1.0, 0.0}, {-1.0, 0.0}, -2.0);
    CHECK(!r.stalled);
    CHECK(r.step == 1.0);
}

TEST_CASE("armijo_backtrack: barrier forces a shorter step satisfying the inequality") {
    // merit rises sharply past x = 0.5
    const auto merit = [](const Vec& x) {
        const double t = x[0];
        return t * t + (t < -0.5 ? 100.0 * (t + 0.5) * (t + 0.5) : 0.0);
    };
    const Vec x0{0.4};
    const Vec dir{-1.5};
    const double gdd = 2.0 * 0.4 * -1.5;
    const auto r = newton::armijo_backtrack(merit, x0, dir, gdd);
    CHECK(!r.stalled);
    CHECK(r.step < 1.0);
    CHECK(merit({x0[0] + r.step * dir[0]}) <= merit(x0) + tol::kArmijoC1 * r.step * gdd);
}

TEST_CASE("armijo_backtrack: ascent direction is a contract violation") {
    const auto merit = [](const Vec& x) { return x[0] * x[0]; };
    CHECK_THROWS_AS((void)newton::armijo_backtrack(merit, {1.0}, {1.0}, 0.5), ContractViolation);
}

TEST_CASE("mmdn_run: stationary start converges at entry") {
    const ProblemDef p = identity_problem();
    // Y == R is the global minimum; gradient vanishes
    const StackedDecision x0(2, 2, {0.0, 1.0, 1.0, 0.0});
    const PointSet r{{{0.0, 1.0}, {1.0, 0.0}}};
    NewtonOptions opts;
    opts.max_iter = 5;
    const auto [state, trace] = newton::mmdn_run(x0, p, r, kGauss1, opts);
    CHECK(trace.stop == StopReason::Converged);
    CHECK(state.iteration == 0);
    CHECK(trace.iterations.empty());
    CHECK(state.grad_norm <= opts.eps);
    CHECK(trace.jacobian_calls == 1);
    CHECK(trace.hessian_calls == 0);
    CHECK(trace.plain_evals == 0);
}

TEST_CASE("mmdn_run: call counting is one Jacobian and one Hessian per iteration") {
    SplitMix64 rng(8);
    const auto p = problems::make_problem("toy-biobj");
    const std::size_t mu = 3;
    Vec d(mu * 2);
    for (auto& v : d) v = rng.uniform(-0.5, 0.5);
    const PointSet r{{{1.0, 9.0}, {2.0, 8.0}, {3.5, 6.0}}};
    NewtonOptions opts;
    opts.max_iter = 4;
    opts.eps = 1e-14;  // force all iterations
    const auto [state, trace] = newton::mmdn_run({mu, 2, d}, p, r, kGauss1, opts);
    REQUIRE(trace.iterations.size() == 4);
    CHECK(trace.jacobian_calls == 4);
    CHECK(trace.hessian_calls == 4);
    std::size_t evals = 0;
    for (const auto& it : trace.iterations) {
        CHECK(it.jacobian_calls == 1);
        CHECK(it.hessian_calls == 1);
        CHECK(it.plain_evals % mu == 0);
        CHECK(it.plain_evals >= mu);
        evals += it.plain_evals;
    }
    CHECK(trace.plain_evals == evals);
}

TEST_CASE("mmdn_run: accepted steps strictly decrease the merit") {
    SplitMix64 rng(9);
    const auto p = problems::make_problem("toy-biobj");
    const std::size_t mu = 4;
    Vec d(mu * 2);
    for (auto& v : d) v = rng.uniform(-1.0, 1.0);
    const PointSet r{{{0.5, 6.0}, {2.0, 4.0}, {4.0, 2.0}, {6.0, 0.5}}};
    NewtonOptions opts;
    opts.max_iter = 8;
    opts.eps = 1e-12;
    const auto [state, trace] = newton::mmdn_run({mu, 2, d}, p, r, kGauss1, opts);
    for (std::size_t i = 1; i < trace.iterations.size(); ++i) {
        if (trace.iterations[i].step > 0.0)
            CHECK(trace.iterations[i].mmd_sq < trace.iterations[i - 1].mmd_sq);
    }
    CHECK(trace.final_mmd_sq <= trace.iterations.front().mmd_sq);
}

TEST_CASE("mmdn_run: unconstrained and no-active-constraint paths take the same step") {
    SplitMix64 rng(10);
    const ProblemDef unconstrained = identity_problem();
    const ProblemDef boxed = identity_problem(-5.0, 5.0, /*with_box=*/true);
    const StackedDecision x0(2, 2, {0.4, 0.2, -0.3, 0.6});
    const PointSet r{{{0.9, 0.1}, {0.1, 0.9}}};
    NewtonOptions opts;
    opts.max_iter = 1;
    opts.eps = 1e-14;
    const auto [s1, t1] = newton::mmdn_run(x0, unconstrained, r, kGauss1, opts);
    const auto [s2, t2] = newton::mmdn_run(x0, boxed, r, kGauss1, opts);
    REQUIRE(s1.x.data.size() == s2.x.data.size());
    for (std::size_t i = 0; i < s1.x.data.size(); ++i)
        CHECK(std::fabs(s1.x.data[i] - s2.x.data[i]) <= 1e-10);
}

TEST_CASE("mmdn_run: local convergence on toy-biobj from a warm start") {
    // stage 1: find the minimizer from on-front points
    const auto p = problems::make_problem("toy-biobj");
    const std::size_t mu = 4;
    const KernelSpec kernel(KernelFamily::Gaussian, 0.5);
    Vec d0;
    for (double t : {-0.6, -0.2, 0.2, 0.6}) {
        d0.push_back(t);
        d0.push_back(t);
    }
    PointSet r;
    const Vec eta{-1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)};
    for (double t : {-0.6, -0.2, 0.2, 0.6}) {
        const Vec f = p.evaluate({t, t});
        r.points.push_back({f[0] + 0.4 * eta[0], f[1] + 0.4 * eta[1]});
    }
    NewtonOptions opts;
    opts.max_iter = 40;
    opts.eps = 1e-12;
    const auto [star, trace0] = newton::mmdn_run({mu, 2, d0}, p, r, kernel, opts);
    REQUIRE(star.grad_norm <= 1e-10);

    // stage 2: perturb by <= 0.1 and require fast, monotone convergence
    SplitMix64 rng(11);
    Vec d1 = star.x.data;
    double norm = 0.0;
    Vec noise(d1.size());
    for (auto& v : noise) v = rng.uniform(-1.0, 1.0);
    for (double v : noise) norm += v * v;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < d1.size(); ++i) d1[i] += 0.09 * noise[i] / norm;

    NewtonOptions opts2;
    opts2.max_iter = 10;
    opts2.eps = 1e-6;
    const auto [state, trace] = newton::mmdn_run({mu, 2, d1}, p, r, kernel, opts2);
    CHECK(trace.stop == StopReason::Converged);
    CHECK(state.grad_norm <= 1e-6);
    CHECK(trace.iterations.size() <= 10);
    for (std::size_t i = 2; i < trace.iterations.size(); ++i)
        CHECK(trace.iterations[i].grad_norm <= trace.iterations[i - 1].grad_norm);
}

TEST_CASE("mmdn_run: trace serialization has one line per iteration") {
    const auto p = problems::make_problem("toy-biobj");
    const StackedDecision x0(2, 2, {0.5, 0.4, -0.4, -0.5});
    const PointSet r{{{1.0, 6.0}, {5.0, 1.0}}};
    NewtonOptions opts;
    opts.max_iter = 3;
    opts.eps = 1e-14;
    const auto [state, trace] = newton::mmdn_run(x0, p, r, kGauss1, opts);
    const std::string lines = trace.to_lines();
    std::size_t count = 0;
    for (char c : lines)
        if (c == '\n') ++count;
    CHECK(count == trace.iterations.size());
    CHECK(lines.find("iter=1") != std::string::npos);
    CHECK(lines.find("tau=") != std::string::npos);
}
