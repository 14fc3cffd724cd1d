#include "mmdn/newton.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mmdn/tolerances.hpp"

namespace mmdn::newton {
namespace {

struct LayoutEntry {
    std::size_t point;
    const ConstraintFn* fn;
};

// Constraint rows in multiplier order: per point, equalities first, then the
// point's active inequalities by ascending constraint index.
std::vector<LayoutEntry> constraint_layout(const NewtonState& state, const ProblemDef& problem) {
    std::vector<LayoutEntry> layout;
    for (std::size_t i = 0; i < state.x.mu; ++i) {
        for (const auto& h : problem.equalities) layout.push_back({i, &h});
        for (const auto& a : state.active)
            if (a.point == i) layout.push_back({i, &problem.inequalities[a.constraint]});
    }
    return layout;
}

Vec constraint_values(const std::vector<LayoutEntry>& layout, const StackedDecision& x) {
    Vec v(layout.size());
    for (std::size_t c = 0; c < layout.size(); ++c) v[c] = layout[c].fn->value(x.point(layout[c].point));
    return v;
}

// Block-diagonal constraint Jacobian, one row per multiplier.
Matrix constraint_jacobian(const std::vector<LayoutEntry>& layout, const StackedDecision& x) {
    const std::size_t n = x.n;
    Matrix j(layout.size(), x.mu * n);
    for (std::size_t c = 0; c < layout.size(); ++c) {
        const Vec g = layout[c].fn->gradient(x.point(layout[c].point));
        for (std::size_t d = 0; d < n; ++d) j(c, layout[c].point * n + d) = g[d];
    }
    return j;
}

// S = sum_c lambda_c * Hess(constraint_c), placed on the (i,i) diagonal block.
void add_constraint_curvature(Matrix& h, const std::vector<LayoutEntry>& layout,
                              const StackedDecision& x, const Vec& lambda) {
    const std::size_t n = x.n;
    for (std::size_t c = 0; c < layout.size(); ++c) {
        if (layout[c].fn->linear || lambda[c] == 0.0) continue;
        const Matrix hc = layout[c].fn->hessian(x.point(layout[c].point));
        const std::size_t off = layout[c].point * n;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) h(off + a, off + b) += lambda[c] * hc(a, b);
    }
}

bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

std::vector<ActivePair> detect_active(const StackedDecision& x, const ProblemDef& problem,
                                      double tol) {
    if (!(tol > 0.0)) throw ContractViolation("detect_active: tol must be positive");
    std::vector<ActivePair> out;
    for (std::size_t i = 0; i < x.mu; ++i) {
        const Vec xi = x.point(i);
        for (std::size_t j = 0; j < problem.inequalities.size(); ++j)
            if (problem.inequalities[j].value(xi) > -tol) out.push_back({i, j});
    }
    return out;
}

Vec kkt_residual(const NewtonState& state, const ProblemDef& problem, const PointSet& r,
                 const KernelSpec& kernel) {
    const auto layout = constraint_layout(state, problem);
    if (state.lambda.size() != layout.size())
        throw ContractViolation("kkt_residual: multiplier count does not match active layout");
    const Vec grad = mmd::grad_decision(state.x, problem, r, kernel);
    Vec res(grad.size() + layout.size());

    std::copy(grad.begin(), grad.end(), res.begin());
    if (!layout.empty()) {
        const Matrix j = constraint_jacobian(layout, state.x);
        for (std::size_t c = 0; c < layout.size(); ++c)
            for (std::size_t d = 0; d < grad.size(); ++d) res[d] += j(c, d) * state.lambda[c];
        const Vec cv = constraint_values(layout, state.x);
        std::copy(cv.begin(), cv.end(), res.begin() + static_cast<long>(grad.size()));
    }
    return res;
}

Matrix kkt_derivative(const NewtonState& state, const ProblemDef& problem, const PointSet& r,
                      const KernelSpec& kernel) {
    const auto layout = constraint_layout(state, problem);
    if (state.lambda.size() != layout.size())
        throw ContractViolation("kkt_derivative: multiplier count does not match active layout");
    Matrix h = mmd::hess_decision(state.x, problem, r, kernel);
    add_constraint_curvature(h, layout, state.x, state.lambda);

    const std::size_t nd = h.rows(), p = layout.size();
    Matrix out(nd + p, nd + p);
    for (std::size_t i = 0; i < nd; ++i)
        for (std::size_t j = 0; j < nd; ++j) out(i, j) = h(i, j);
    if (p > 0) {
        const Matrix j = constraint_jacobian(layout, state.x);
        for (std::size_t c = 0; c < p; ++c)
            for (std::size_t d = 0; d < nd; ++d) {
                out(nd + c, d) = j(c, d);
                out(d, nd + c) = j(c, d);
            }
    }
    return out;
}

PreconditionResult precondition(const Matrix& h) {
    PreconditionResult res;
    res.attempts = 1;
    if (auto l = linalg::cholesky(h)) {
        res.tau = 0.0;
        res.cholesky_factor = std::move(*l);
        return res;
    }
    double min_diag = h(0, 0);
    for (std::size_t i = 1; i < h.rows(); ++i) min_diag = std::min(min_diag, h(i, i));
    double tau = std::max(0.0, tol::kPrecondBeta - min_diag);
    if (tau == 0.0) tau = tol::kPrecondBeta;  // indefinite despite positive diagonal

    Matrix shifted = h;
    double applied = 0.0;
    while (res.attempts < tol::kPrecondMaxAttempts) {
        ++res.attempts;
        for (std::size_t i = 0; i < h.rows(); ++i) shifted(i, i) += tau - applied;
        applied = tau;
        if (auto l = linalg::cholesky(shifted)) {
            res.tau = tau;
            res.cholesky_factor = std::move(*l);
            return res;
        }
        tau *= 2.0;
    }
    throw PreconditionFailure("precondition: attempt cap exceeded, matrix is pathological");
}

ArmijoResult armijo_backtrack(const std::function<double(const Vec&)>& merit, const Vec& x0,
                              const Vec& direction, double grad_dot_dir) {
    if (!(grad_dot_dir < 0.0))
        throw ContractViolation("armijo_backtrack: direction is not a descent direction");
    const double m0 = merit(x0);
    double s = 1.0;
    for (int t = 0; t <= tol::kArmijoMaxHalvings; ++t) {
        const Vec trial = linalg::operator_axpy(s, direction, x0);
        if (merit(trial) <= m0 + tol::kArmijoC1 * s * grad_dot_dir) return {s, false};
        s *= 0.5;
    }
    return {0.0, true};
}

namespace {

// Remap multipliers after an active-set change: survivors keep their value,
// newly active constraints start at zero. Both lists are point-major with
// ascending constraint indices per point.
Vec remap_lambda(const NewtonState& state, const std::vector<ActivePair>& new_active,
                 std::size_t p_eq, std::size_t mu) {
    std::vector<std::size_t> old_off(mu + 1, 0), new_off(mu + 1, 0);
    std::vector<std::size_t> old_cnt(mu, 0), new_cnt(mu, 0);
    for (const auto& a : state.active) old_cnt[a.point]++;
    for (const auto& a : new_active) new_cnt[a.point]++;
    for (std::size_t i = 0; i < mu; ++i) {
        old_off[i + 1] = old_off[i] + p_eq + old_cnt[i];
        new_off[i + 1] = new_off[i] + p_eq + new_cnt[i];
    }
    Vec out(new_off[mu], 0.0);
    if (state.lambda.size() != old_off[mu]) return out;  // stale state: reset to zero

    for (std::size_t i = 0; i < mu; ++i)
        for (std::size_t je = 0; je < p_eq; ++je)
            out[new_off[i] + je] = state.lambda[old_off[i] + je];

    std::vector<std::size_t> new_seen(mu, 0);
    for (const auto& a : new_active) {
        const std::size_t idx = new_off[a.point] + p_eq + new_seen[a.point]++;
        std::size_t old_idx = old_off[a.point] + p_eq;
        for (const auto& b : state.active) {
            if (b.point != a.point) continue;
            if (b.constraint == a.constraint) {
                out[idx] = state.lambda[old_idx];
                break;
            }
            if (b.constraint < a.constraint) ++old_idx;
        }
    }
    return out;
}

}  // namespace

std::pair<NewtonState, NewtonTrace> mmdn_run(const StackedDecision& x0, const ProblemDef& problem,
                                             const PointSet& r, const KernelSpec& kernel,
                                             const NewtonOptions& opts) {
    if (!(opts.eps > 0.0)) throw ContractViolation("mmdn_run: eps must be positive");
    if (x0.n != problem.n) throw ContractViolation("mmdn_run: decision dimension mismatch");
    const std::size_t mu = x0.mu, n = x0.n;
    const std::size_t p_eq = problem.equalities.size();

    NewtonState state;
    NewtonTrace trace;
    state.x = x0;

    // project the start into the box (optionally with a relative margin)
    for (std::size_t i = 0; i < mu; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double range = problem.upper[j] - problem.lower[j];
            const double lo = problem.lower[j] + opts.boundary_margin * range;
            const double hi = problem.upper[j] - opts.boundary_margin * range;
            state.x.data[i * n + j] = std::clamp(state.x.data[i * n + j], lo, hi);
        }

    auto eval_points = [&](const StackedDecision& x, PointSet& out) {
        out.points.clear();
        for (std::size_t i = 0; i < mu; ++i) {
            Vec f = problem.evaluate(x.point(i));
            if (!all_finite(f)) return false;
            out.points.push_back(std::move(f));
        }
        return true;
    };

    PointSet y;
    if (!eval_points(state.x, y)) {
        trace.stop = StopReason::NonFinite;
        return {state, trace};
    }
    double current_mmd = mmd::mmd_sq(y, r, kernel);

    trace.stop = StopReason::MaxIterations;
    for (std::size_t k = 0; k < opts.max_iter; ++k) {
        // gradient (one whole-set Jacobian call)
        std::vector<Matrix> jacobians;
        jacobians.reserve(mu);
        for (std::size_t i = 0; i < mu; ++i) jacobians.push_back(problem.jacobian(state.x.point(i)));
        trace.jacobian_calls++;
        const std::vector<Vec> rows = mmd::grad_objective(y, r, kernel);
        const Vec grad = mmd::grad_decision_from(rows, jacobians);
        if (!all_finite(grad)) {
            trace.stop = StopReason::NonFinite;
            break;
        }
        state.grad_norm = linalg::norm2(grad);
        if (state.grad_norm <= opts.eps) {
            trace.stop = StopReason::Converged;
            break;
        }

        if (opts.mode == BoundsMode::ActiveSet && !problem.inequalities.empty()) {
            auto new_active = detect_active(state.x, problem, opts.active_tol);
            state.lambda = remap_lambda(state, new_active, p_eq, mu);
            state.active = std::move(new_active);
        } else if (state.lambda.size() != p_eq * mu) {
            // clip mode keeps equality multipliers only; box faces are
            // handled by projection inside the line search
            state.active.clear();
            state.lambda.assign(p_eq * mu, 0.0);
        }

        // Hessian (one whole-set call)
        std::vector<std::vector<Matrix>> tensors;
        tensors.reserve(mu);
        for (std::size_t i = 0; i < mu; ++i)
            tensors.push_back(problem.hessian_tensor(state.x.point(i)));
        trace.hessian_calls++;
        Matrix h = mmd::hess_decision_from(y, r, kernel, jacobians, tensors);

        const auto layout = constraint_layout(state, problem);
        add_constraint_curvature(h, layout, state.x, state.lambda);

        PreconditionResult pre;
        try {
            pre = precondition(h);
        } catch (const PreconditionFailure&) {
            trace.stop = StopReason::SolveFailure;
            break;
        }

        const std::size_t np = layout.size();
        Vec dx(mu * n, 0.0), dlam(np, 0.0);
        Vec cvals;
        if (np == 0) {
            Vec neg = grad;
            for (double& v : neg) v = -v;
            dx = linalg::cholesky_solve(pre.cholesky_factor, neg);
        } else {
            // range-space solve of the KKT system against the factored
            // H + S + tau*I: (J Ht^-1 J') dlam = c - J Ht^-1 r1,
            // dx = -Ht^-1 (r1 + J' dlam), with r1 = grad + J' lambda
            const Matrix jmat = constraint_jacobian(layout, state.x);
            cvals = constraint_values(layout, state.x);
            Vec r1 = grad;
            for (std::size_t c = 0; c < np; ++c)
                for (std::size_t d = 0; d < mu * n; ++d)
                    r1[d] += jmat(c, d) * state.lambda[c];

            const Vec u = linalg::cholesky_solve(pre.cholesky_factor, r1);
            std::vector<Vec> hinv_jt(np);
            for (std::size_t c = 0; c < np; ++c) {
                Vec row(mu * n);
                for (std::size_t d = 0; d < mu * n; ++d) row[d] = jmat(c, d);
                hinv_jt[c] = linalg::cholesky_solve(pre.cholesky_factor, row);
            }
            Matrix schur(np, np);
            for (std::size_t c = 0; c < np; ++c)
                for (std::size_t c2 = 0; c2 <= c; ++c2) {
                    double s = 0.0;
                    for (std::size_t d = 0; d < mu * n; ++d) s += jmat(c, d) * hinv_jt[c2][d];
                    schur(c, c2) = s;
                    schur(c2, c) = s;
                }
            Vec rhs_s(np);
            for (std::size_t c = 0; c < np; ++c) {
                double s = cvals[c];
                for (std::size_t d = 0; d < mu * n; ++d) s -= jmat(c, d) * u[d];
                rhs_s[c] = s;
            }
            const auto schur_factor = linalg::cholesky(schur);
            if (!schur_factor) {  // rank-deficient constraint Jacobian
                trace.stop = StopReason::SolveFailure;
                break;
            }
            dlam = linalg::cholesky_solve(*schur_factor, rhs_s);
            Vec r1j = r1;
            for (std::size_t c = 0; c < np; ++c)
                for (std::size_t d = 0; d < mu * n; ++d) r1j[d] += jmat(c, d) * dlam[c];
            dx = linalg::cholesky_solve(pre.cholesky_factor, r1j);
            for (double& v : dx) v = -v;
        }

        if (opts.mode == BoundsMode::Clip) {
            // project the full step onto the margin box and search along the
            // feasible chord; trials x + s*dx then stay feasible for s <= 1
            for (std::size_t i = 0; i < mu; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    const double range = problem.upper[j] - problem.lower[j];
                    const double lo = problem.lower[j] + opts.boundary_margin * range;
                    const double hi = problem.upper[j] - opts.boundary_margin * range;
                    const double target =
                        std::clamp(state.x.data[i * n + j] + dx[i * n + j], lo, hi);
                    dx[i * n + j] = target - state.x.data[i * n + j];
                }
        }

        const double gdd = linalg::dot(grad, dx);
        double rho = 0.0, viol = 0.0;
        if (np > 0) {
            rho = std::max(1.0, 2.0 * linalg::norm_inf(state.lambda));
            for (double v : cvals) viol += std::fabs(v);
        }
        const double descent = gdd - rho * viol;
        if (!(descent < 0.0)) {
            trace.stop = StopReason::Stalled;
            break;
        }

        // memoized merit, one whole-set objective evaluation per new trial
        struct TrialEval {
            Vec x_raw;
            Vec x_used;  // after clipping in clip mode
            PointSet y;
            double mmd2 = 0.0;
            double merit = 0.0;
        };
        std::vector<TrialEval> memo;
        std::size_t trial_evals = 0;
        const double merit_now = current_mmd + rho * viol;

        auto merit_fn = [&](const Vec& xv) -> double {
            if (xv == state.x.data) return merit_now;
            for (const auto& t : memo)
                if (t.x_raw == xv) return t.merit;
            TrialEval t;
            t.x_raw = xv;
            StackedDecision xs(mu, n, xv);
            if (opts.mode == BoundsMode::Clip) {
                // clamp into the margin-shrunk box; several benchmarks have
                // derivative singularities exactly on a face
                for (std::size_t i = 0; i < mu; ++i)
                    for (std::size_t j = 0; j < n; ++j) {
                        const double range = problem.upper[j] - problem.lower[j];
                        xs.data[i * n + j] = std::clamp(
                            xs.data[i * n + j], problem.lower[j] + opts.boundary_margin * range,
                            problem.upper[j] - opts.boundary_margin * range);
                    }
            }
            t.x_used = xs.data;
            trial_evals++;
            if (!eval_points(xs, t.y)) {
                t.merit = std::numeric_limits<double>::infinity();
                memo.push_back(std::move(t));
                return std::numeric_limits<double>::infinity();
            }
            t.mmd2 = mmd::mmd_sq(t.y, r, kernel);
            double m = t.mmd2;
            if (np > 0) {
                const Vec cv = constraint_values(layout, xs);
                double vl = 0.0;
                for (double v : cv) vl += std::fabs(v);
                m += rho * vl;
            }
            t.merit = m;
            memo.push_back(std::move(t));
            return m;
        };

        ArmijoResult ar;
        try {
            ar = armijo_backtrack(merit_fn, state.x.data, dx, descent);
        } catch (const ContractViolation&) {
            trace.stop = StopReason::Stalled;
            break;
        }
        trace.plain_evals += trial_evals * mu;
        if (ar.stalled) {
            trace.stop = StopReason::Stalled;
            trace.iterations.push_back({k + 1, current_mmd, state.grad_norm, 0.0, pre.tau, 1, 1,
                                        trial_evals * mu});
            break;
        }

        const Vec accepted_raw = linalg::operator_axpy(ar.step, dx, state.x.data);
        const TrialEval* hit = nullptr;
        for (const auto& t : memo)
            if (t.x_raw == accepted_raw) {
                hit = &t;
                break;
            }
        state.x.data = hit->x_used;
        y = hit->y;
        const double mmd_before = current_mmd;
        current_mmd = hit->mmd2;
        for (std::size_t c = 0; c < np; ++c) state.lambda[c] += ar.step * dlam[c];
        state.iteration = k + 1;
        trace.iterations.push_back(
            {k + 1, mmd_before, state.grad_norm, ar.step, pre.tau, 1, 1, trial_evals * mu});
    }

    trace.final_mmd_sq = current_mmd;
    return {state, trace};
}

}  // namespace mmdn::newton

namespace mmdn {

std::string NewtonTrace::to_lines() const {
    std::string out;
    char buf[192];
    for (const auto& it : iterations) {
        std::snprintf(buf, sizeof(buf),
                      "iter=%zu mmd2=%.12e grad_norm=%.12e step=%.9g tau=%.9g jac=%zu hess=%zu "
                      "evals=%zu\n",
                      it.iteration, it.mmd_sq, it.grad_norm, it.step, it.tau, it.jacobian_calls,
                      it.hessian_calls, it.plain_evals);
        out += buf;
    }
    return out;
}

}  // namespace mmdn
