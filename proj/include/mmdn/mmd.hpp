#pragma once

#include "mmdn/kernels.hpp"
#include "mmdn/problems.hpp"
#include "mmdn/types.hpp"

namespace mmdn {

// Per-block eigenvalue bounds of the objective-space MMD Hessian (Gaussian
// kernel, |Y| == |R|) plus the per-point radii bounding the full spectrum.
struct SpectrumBounds {
    Matrix off_diag_lower;  // mu x mu, entry (m,l) valid for m != l
    double off_diag_upper = 0.0;
    Vec diag_lower, diag_upper;  // per point l
    Vec radii;                   // spectrum of the full Hessian lies in U [-r_l, r_l]
};

namespace mmd {

// Biased V-statistic MMD^2 between empirical measures (self-similarity terms
// included in both double sums).
double mmd_sq(const PointSet& y, const PointSet& r, const KernelSpec& kernel);

// Row l holds d MMD^2 / d y^l (length k).
std::vector<Vec> grad_objective(const PointSet& y, const PointSet& r, const KernelSpec& kernel);

// Stacked gradient w.r.t. the decision variables, segment l = row_l * DF(x^l).
Vec grad_decision(const StackedDecision& x, const ProblemDef& problem, const PointSet& r,
                  const KernelSpec& kernel);

// mu*k x mu*k symmetric matrix of k x k blocks.
Matrix hess_objective(const PointSet& y, const PointSet& r, const KernelSpec& kernel);

// mu*n x mu*n decision-space Hessian: block (m,l) =
//   DF(x^m)' * H^m_l * DF(x^l)  +  delta_ml * sum_j (row_l)_j * D2F_j(x^l)
Matrix hess_decision(const StackedDecision& x, const ProblemDef& problem, const PointSet& r,
                     const KernelSpec& kernel);

// Variants that reuse objective values / Jacobians the caller already has.
std::vector<Vec> grad_objective_at(const PointSet& y, const PointSet& r,
                                   const KernelSpec& kernel);
Vec grad_decision_from(const std::vector<Vec>& obj_rows, const std::vector<Matrix>& jacobians);
Matrix hess_decision_from(const PointSet& y, const PointSet& r, const KernelSpec& kernel,
                          const std::vector<Matrix>& jacobians,
                          const std::vector<std::vector<Matrix>>& hessian_tensors);

// Eigenvalue bounds per Hessian block; Gaussian kernels with |Y| == |R| only.
SpectrumBounds hessian_block_bounds(const PointSet& y, const PointSet& r,
                                    const KernelSpec& kernel);

// Monte-Carlo estimate of the KKT weight ratio for a single bi-objective
// approximation point: draws nu ~ N(0, I_2) and returns
//   E[nu_2 * D(nu)] / E[nu_1 * D(nu)],  D(nu) = sum_k sin(sqrt(2 theta) <nu, r^k - y>).
// Throws IllConditionedRatioError when the denominator estimate is within
// three standard errors of zero.
double kkt_slope_estimate(const PointSet& r, const Vec& y, double theta, std::size_t samples,
                          std::uint64_t seed);

}  // namespace mmd
}  // namespace mmdn
