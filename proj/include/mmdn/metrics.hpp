#pragma once

#include "mmdn/types.hpp"

namespace mmdn {

// Function-evaluation bookkeeping with the empirical cost ratios of one
// Jacobian call (1.47 evaluations) and one Hessian call (1.89 evaluations).
struct BudgetLedger {
    std::size_t plain_evals = 0;
    std::size_t jacobian_calls = 0;
    std::size_t hessian_calls = 0;
    double jac_cost = 1.47;
    double hess_cost = 1.89;
};

namespace metrics {

// ((1/|A|) sum_a min_f ||a-f||^p)^(1/p)
double gd_p(const PointSet& approx, const PointSet& front, double p);

// gd_p with the arguments swapped.
double igd_p(const PointSet& approx, const PointSet& front, double p);

// averaged Hausdorff distance: max(gd_p, igd_p)
double delta_p(const PointSet& approx, const PointSet& front, double p);

double equivalent_evals(const BudgetLedger& ledger);

}  // namespace metrics
}  // namespace mmdn
