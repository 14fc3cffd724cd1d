#pragma once

#include <functional>
#include <string>
#include <utility>

#include "mmdn/mmd.hpp"

namespace mmdn {

// One active inequality: constraint `constraint` of `problem.inequalities`
// evaluated at decision point `point`.
struct ActivePair {
    std::size_t point;
    std::size_t constraint;
    bool operator==(const ActivePair&) const = default;
};

struct NewtonState {
    StackedDecision x;
    Vec lambda;                      // multipliers, point-major constraint layout
    std::vector<ActivePair> active;  // active inequalities, point-major
    std::size_t iteration = 0;
    double grad_norm = 0.0;
};

struct PreconditionResult {
    double tau = 0.0;
    Matrix cholesky_factor;  // factor of H + tau*I
    int attempts = 0;
};

struct ArmijoResult {
    double step = 0.0;  // 0 together with stalled=true when the search exhausts
    bool stalled = false;
};

enum class BoundsMode { ActiveSet, Clip };

enum class StopReason { Converged, MaxIterations, Stalled, SolveFailure, NonFinite };

struct NewtonOptions {
    std::size_t max_iter = 5;
    double eps = 1e-6;
    BoundsMode mode = BoundsMode::ActiveSet;
    double active_tol = 1e-6;
    // relative nudge pulling the warm start off the box faces; several
    // benchmarks have derivative singularities exactly on a face
    double boundary_margin = 0.0;
};

struct IterationRecord {
    std::size_t iteration = 0;
    double mmd_sq = 0.0;     // at iteration start
    double grad_norm = 0.0;  // at iteration start
    double step = 0.0;       // accepted line-search step
    double tau = 0.0;
    std::size_t jacobian_calls = 0;  // whole-set calls this iteration
    std::size_t hessian_calls = 0;
    std::size_t plain_evals = 0;  // per-point objective evaluations this iteration
};

struct NewtonTrace {
    std::vector<IterationRecord> iterations;
    StopReason stop = StopReason::MaxIterations;
    std::size_t jacobian_calls = 0;
    std::size_t hessian_calls = 0;
    std::size_t plain_evals = 0;
    double final_mmd_sq = 0.0;

    std::string to_lines() const;  // one line per iteration
};

namespace newton {

// All (point, constraint) pairs with g_j(x^i) > -tol, point-major order.
std::vector<ActivePair> detect_active(const StackedDecision& x, const ProblemDef& problem,
                                      double tol);

// Root-finding residual of the KKT system: top block grad MMD^2 + J'lambda,
// bottom block the equality-plus-active-inequality values.
Vec kkt_residual(const NewtonState& state, const ProblemDef& problem, const PointSet& r,
                 const KernelSpec& kernel);

// [[H + S, J'], [J, 0]]; S vanishes when every active constraint is linear.
Matrix kkt_derivative(const NewtonState& state, const ProblemDef& problem, const PointSet& r,
                      const KernelSpec& kernel);

// Diagonal-shift preconditioning: smallest tau from {0, tau0, 2*tau0, ...}
// for which the Cholesky factorization succeeds.
PreconditionResult precondition(const Matrix& h);

// Largest s in {1, 1/2, ..., 2^-25} satisfying the Armijo condition
// merit(x0 + s*d) <= merit(x0) + c1*s*grad_dot_dir. grad_dot_dir must be
// negative (descent).
ArmijoResult armijo_backtrack(const std::function<double(const Vec&)>& merit, const Vec& x0,
                              const Vec& direction, double grad_dot_dir);

// The MMDN iteration loop.
std::pair<NewtonState, NewtonTrace> mmdn_run(const StackedDecision& x0, const ProblemDef& problem,
                                             const PointSet& r, const KernelSpec& kernel,
                                             const NewtonOptions& opts);

}  // namespace newton
}  // namespace mmdn
