#include "mmdn/mmd.hpp"

#include <cmath>

#include "mmdn/rng.hpp"
#include "mmdn/tolerances.hpp"

namespace mmdn::mmd {
namespace {

void check_sets(const PointSet& y, const PointSet& r) {
    if (y.size() == 0 || r.size() == 0) throw ContractViolation("mmd: empty point set");
    y.require_uniform_dim();
    r.require_uniform_dim();
    if (y.dim() != r.dim()) throw ContractViolation("mmd: objective dimensions differ");
}

double sq_dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace

double mmd_sq(const PointSet& y, const PointSet& r, const KernelSpec& kernel) {
    check_sets(y, r);
    const double mu = static_cast<double>(y.size());
    const double lam = static_cast<double>(r.size());
    double syy = 0.0, srr = 0.0, sry = 0.0;
    for (const auto& a : y.points)
        for (const auto& b : y.points) syy += kernels::value(kernel, a, b);
    for (const auto& a : r.points)
        for (const auto& b : r.points) srr += kernels::value(kernel, a, b);
    for (const auto& a : r.points)
        for (const auto& b : y.points) sry += kernels::value(kernel, a, b);
    return syy / (mu * mu) + srr / (lam * lam) - 2.0 * sry / (mu * lam);
}

std::vector<Vec> grad_objective(const PointSet& y, const PointSet& r, const KernelSpec& kernel) {
    check_sets(y, r);
    const std::size_t mu = y.size(), lam = r.size(), k = y.dim();
    const double cy = 2.0 / (static_cast<double>(mu) * static_cast<double>(mu));
    const double cr = 2.0 / (static_cast<double>(mu) * static_cast<double>(lam));
    std::vector<Vec> rows(mu, Vec(k, 0.0));
    for (std::size_t l = 0; l < mu; ++l) {
        Vec& row = rows[l];
        for (std::size_t i = 0; i < mu; ++i) {
            if (i == l) continue;
            const Vec g = kernels::grad(kernel, y.points[i], y.points[l]);
            for (std::size_t d = 0; d < k; ++d) row[d] += cy * g[d];
        }
        for (std::size_t i = 0; i < lam; ++i) {
            const Vec g = kernels::grad(kernel, r.points[i], y.points[l]);
            for (std::size_t d = 0; d < k; ++d) row[d] -= cr * g[d];
        }
    }
    return rows;
}

std::vector<Vec> grad_objective_at(const PointSet& y, const PointSet& r,
                                   const KernelSpec& kernel) {
    return grad_objective(y, r, kernel);
}

Vec grad_decision_from(const std::vector<Vec>& obj_rows, const std::vector<Matrix>& jacobians) {
    const std::size_t mu = obj_rows.size();
    const std::size_t n = jacobians.front().cols();
    const std::size_t k = jacobians.front().rows();
    Vec out(mu * n, 0.0);
    for (std::size_t l = 0; l < mu; ++l) {
        const Matrix& jf = jacobians[l];
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t d = 0; d < k; ++d) s += obj_rows[l][d] * jf(d, j);
            out[l * n + j] = s;
        }
    }
    return out;
}

Vec grad_decision(const StackedDecision& x, const ProblemDef& problem, const PointSet& r,
                  const KernelSpec& kernel) {
    if (x.n != problem.n) throw ContractViolation("grad_decision: dimension mismatch");
    PointSet y;
    std::vector<Matrix> jacobians;
    for (std::size_t i = 0; i < x.mu; ++i) {
        const Vec xi = x.point(i);
        y.points.push_back(problem.evaluate(xi));
        jacobians.push_back(problem.jacobian(xi));
    }
    return grad_decision_from(grad_objective(y, r, kernel), jacobians);
}

Matrix hess_objective(const PointSet& y, const PointSet& r, const KernelSpec& kernel) {
    check_sets(y, r);
    const std::size_t mu = y.size(), lam = r.size(), k = y.dim();
    const double cy = 2.0 / (static_cast<double>(mu) * static_cast<double>(mu));
    const double cr = 2.0 / (static_cast<double>(mu) * static_cast<double>(lam));
    Matrix h(mu * k, mu * k);
    for (std::size_t m = 0; m < mu; ++m) {
        for (std::size_t l = 0; l < mu; ++l) {
            Matrix block(k, k);
            if (m == l) {
                for (std::size_t i = 0; i < mu; ++i) {
                    if (i == l) continue;
                    const Matrix b = kernels::hess(kernel, y.points[i], y.points[l]);
                    for (std::size_t a = 0; a < k; ++a)
                        for (std::size_t c = 0; c < k; ++c) block(a, c) += cy * b(a, c);
                }
                for (std::size_t i = 0; i < lam; ++i) {
                    const Matrix b = kernels::hess(kernel, r.points[i], y.points[l]);
                    for (std::size_t a = 0; a < k; ++a)
                        for (std::size_t c = 0; c < k; ++c) block(a, c) -= cr * b(a, c);
                }
            } else {
                // mixed second derivative d^2 k(y^m, y^l) / d y^m d y^l
                const Matrix b = kernels::hess(kernel, y.points[m], y.points[l], /*mixed=*/true);
                for (std::size_t a = 0; a < k; ++a)
                    for (std::size_t c = 0; c < k; ++c) block(a, c) = cy * b(a, c);
            }
            for (std::size_t a = 0; a < k; ++a)
                for (std::size_t c = 0; c < k; ++c) h(m * k + a, l * k + c) = block(a, c);
        }
    }
    // kill floating-point asymmetry before any factorization downstream
    for (std::size_t i = 0; i < h.rows(); ++i)
        for (std::size_t j = 0; j < i; ++j) {
            const double v = 0.5 * (h(i, j) + h(j, i));
            h(i, j) = v;
            h(j, i) = v;
        }
    return h;
}

Matrix hess_decision_from(const PointSet& y, const PointSet& r, const KernelSpec& kernel,
                          const std::vector<Matrix>& jacobians,
                          const std::vector<std::vector<Matrix>>& hessian_tensors) {
    const std::size_t mu = y.size(), k = y.dim();
    const std::size_t n = jacobians.front().cols();
    const Matrix hobj = hess_objective(y, r, kernel);
    const std::vector<Vec> rows = grad_objective(y, r, kernel);

    Matrix h(mu * n, mu * n);
    for (std::size_t m = 0; m < mu; ++m) {
        for (std::size_t l = 0; l < mu; ++l) {
            // DF(x^m)' * H^m_l * DF(x^l)
            const Matrix& jm = jacobians[m];
            const Matrix& jl = jacobians[l];
            Matrix tmp(k, n);  // H^m_l * DF(x^l)
            for (std::size_t a = 0; a < k; ++a)
                for (std::size_t j = 0; j < n; ++j) {
                    double s = 0.0;
                    for (std::size_t c = 0; c < k; ++c) s += hobj(m * k + a, l * k + c) * jl(c, j);
                    tmp(a, j) = s;
                }
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    double s = 0.0;
                    for (std::size_t a = 0; a < k; ++a) s += jm(a, i) * tmp(a, j);
                    h(m * n + i, l * n + j) = s;
                }
            if (m == l) {
                for (std::size_t d = 0; d < k; ++d) {
                    const double w = rows[l][d];
                    if (w == 0.0) continue;
                    const Matrix& hf = hessian_tensors[l][d];
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < n; ++j) h(l * n + i, l * n + j) += w * hf(i, j);
                }
            }
        }
    }
    for (std::size_t i = 0; i < h.rows(); ++i)
        for (std::size_t j = 0; j < i; ++j) {
            const double v = 0.5 * (h(i, j) + h(j, i));
            h(i, j) = v;
            h(j, i) = v;
        }
    return h;
}

Matrix hess_decision(const StackedDecision& x, const ProblemDef& problem, const PointSet& r,
                     const KernelSpec& kernel) {
    if (x.n != problem.n) throw ContractViolation("hess_decision: dimension mismatch");
    PointSet y;
    std::vector<Matrix> jacobians;
    std::vector<std::vector<Matrix>> tensors;
    for (std::size_t i = 0; i < x.mu; ++i) {
        const Vec xi = x.point(i);
        y.points.push_back(problem.evaluate(xi));
        jacobians.push_back(problem.jacobian(xi));
        tensors.push_back(problem.hessian_tensor(xi));
    }
    return hess_decision_from(y, r, kernel, jacobians, tensors);
}

SpectrumBounds hessian_block_bounds(const PointSet& y, const PointSet& r,
                                    const KernelSpec& kernel) {
    check_sets(y, r);
    if (kernel.family != KernelFamily::Gaussian)
        throw UnsupportedKernelError(
            "hessian_block_bounds: Laplace spectral measure has unbounded moments");
    if (y.size() != r.size())
        throw ContractViolation("hessian_block_bounds: |Y| and |R| must match");

    const std::size_t mu = y.size(), k = y.dim();
    const double mud = static_cast<double>(mu);
    const auto mom = kernels::spectral_moments(kernel, k);

    SpectrumBounds b;
    b.off_diag_lower = Matrix(mu, mu);
    b.off_diag_upper = 2.0 / (mud * mud) * mom.m2;
    b.diag_lower.resize(mu);
    b.diag_upper.resize(mu);
    b.radii.resize(mu);

    for (std::size_t m = 0; m < mu; ++m)
        for (std::size_t l = 0; l < mu; ++l) {
            if (m == l) continue;
            b.off_diag_lower(m, l) =
                2.0 / (mud * mud) *
                (mom.sigma_min_c - 0.5 * mom.m4 * sq_dist(y.points[m], y.points[l]));
        }

    for (std::size_t l = 0; l < mu; ++l) {
        double d2r = 0.0, d2y = 0.0;
        for (std::size_t a = 0; a < mu; ++a) d2r += sq_dist(r.points[a], y.points[l]);
        for (std::size_t bidx = 0; bidx < mu; ++bidx)
            if (bidx != l) d2y += sq_dist(y.points[bidx], y.points[l]);
        d2r /= mud;
        d2y /= mud;
        b.diag_lower[l] = 2.0 / mud * (mom.sigma_min_c - mom.m2 - 0.5 * mom.m4 * d2r);
        b.diag_upper[l] = 2.0 / mud * (mom.m2 - mom.sigma_min_c + 0.5 * mom.m4 * d2y);
        b.radii[l] = 2.0 / (mud * mud) * ((2.0 * mud - 1.0) * mom.m2 - mom.sigma_min_c) +
                     mom.m4 / mud * (d2r + d2y);
    }
    return b;
}

double kkt_slope_estimate(const PointSet& r, const Vec& y, double theta, std::size_t samples,
                          std::uint64_t seed) {
    r.require_uniform_dim();
    if (r.dim() != 2 || y.size() != 2)
        throw ContractViolation("kkt_slope_estimate: bi-objective points required");
    if (samples < 100000) throw ContractViolation("kkt_slope_estimate: samples must be >= 1e5");

    const double sq2t = std::sqrt(2.0 * theta);
    SplitMix64 rng(seed);
    double s1 = 0.0, s2 = 0.0, q1 = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double n1 = rng.normal();
        const double n2 = rng.normal();
        double dsum = 0.0;
        for (const auto& rp : r.points)
            dsum += std::sin(sq2t * (n1 * (rp[0] - y[0]) + n2 * (rp[1] - y[1])));
        const double v1 = n1 * dsum;
        s1 += v1;
        s2 += n2 * dsum;
        q1 += v1 * v1;
    }
    const double ns = static_cast<double>(samples);
    const double m1 = s1 / ns;
    const double se1 = std::sqrt(std::max(q1 / ns - m1 * m1, 0.0) / ns);
    if (std::fabs(m1) < 3.0 * se1)
        throw IllConditionedRatioError(
            "kkt_slope_estimate: denominator within 3 standard errors of zero");
    return (s2 / ns) / m1;
}

}  // namespace mmdn::mmd
