#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mmdn/types.hpp"

namespace mmdn {

// Scalar constraint with analytic derivatives. Box faces are linear, so their
// Hessian is identically zero and `linear` lets the KKT assembly skip it.
struct ConstraintFn {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    std::function<Matrix(const Vec&)> hessian;
    bool linear = false;
};

// Benchmark problem with analytic objectives, Jacobian, per-objective Hessians
// and a Pareto-front sampler. All evaluation members are pure.
struct ProblemDef {
    std::string name;
    std::size_t n = 0;  // decision dimension
    std::size_t k = 0;  // objective dimension
    Vec lower, upper;

    std::function<Vec(const Vec&)> evaluate;                          // R^n -> R^k
    std::function<Matrix(const Vec&)> jacobian;                       // k x n
    std::function<std::vector<Matrix>(const Vec&)> hessian_tensor;    // k matrices, n x n each
    std::function<PointSet(std::size_t)> front_sampler;

    std::vector<ConstraintFn> equalities;    // h_i(x) = 0
    std::vector<ConstraintFn> inequalities;  // g_j(x) <= 0; the 2n box faces by default

    Vec clip(const Vec& x) const;
    bool inside_box(const Vec& x, double margin = 0.0) const;
};

namespace problems {

// name in {zdt1..zdt4, dtlz1..dtlz7, toy-biobj}; n = 0 picks the standard
// default dimension.
ProblemDef make_problem(const std::string& name, std::size_t n = 0);

const std::vector<std::string>& available();

// count >= 2 deterministic points on the true Pareto front.
PointSet front_sample(const ProblemDef& problem, std::size_t count);

struct DerivativeReport {
    double jacobian_max_rel = 0.0;  // normwise: max|J - J_fd| / max(1, max|J_fd|)
    double hessian_max_rel = 0.0;
};

// Central-difference consistency check of the analytic derivatives at an
// interior point.
DerivativeReport check_derivatives(const ProblemDef& problem, const Vec& x, double step);

// Box faces of `problem` as 2n linear inequality constraints
// (lower_j - x_j <= 0, x_j - upper_j <= 0), ordered by variable then side.
std::vector<ConstraintFn> box_constraints(const ProblemDef& problem);

}  // namespace problems
}  // namespace mmdn
