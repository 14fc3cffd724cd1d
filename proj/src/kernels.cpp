#include "mmdn/kernels.hpp"

#include <cmath>

#include "mmdn/errors.hpp"
#include "mmdn/tolerances.hpp"

namespace mmdn {

KernelSpec::KernelSpec(KernelFamily f, double t) : family(f), theta(t) {
    if (!(t > 0.0)) throw ContractViolation("KernelSpec: theta must be positive");
}

namespace kernels {
namespace {

void check_dims(const Vec& a, const Vec& b) {
    if (a.size() != b.size() || a.empty())
        throw ContractViolation("kernel: point dimensions do not match");
}

}  // namespace

double value(const KernelSpec& spec, const Vec& y, const Vec& y2) {
    check_dims(y, y2);
    double d2 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - y2[i];
        d2 += d * d;
    }
    switch (spec.family) {
        case KernelFamily::Gaussian:
            return std::exp(-spec.theta * d2);
        case KernelFamily::Laplace:
            return std::exp(-spec.theta * std::sqrt(d2));
    }
    return 0.0;
}

Vec grad(const KernelSpec& spec, const Vec& yi, const Vec& yl) {
    check_dims(yi, yl);
    const std::size_t k = yi.size();
    Vec d(k);
    double d2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        d[i] = yi[i] - yl[i];
        d2 += d[i] * d[i];
    }
    Vec g(k, 0.0);
    if (spec.family == KernelFamily::Gaussian) {
        const double kv = std::exp(-spec.theta * d2);
        const double f = 2.0 * spec.theta * kv;
        for (std::size_t i = 0; i < k; ++i) g[i] = f * d[i];
        return g;
    }
    const double r = std::sqrt(d2);
    if (r < tol::kCoincident) return g;  // subgradient selection 0
    const double kv = std::exp(-spec.theta * r);
    const double f = spec.theta * kv / r;
    for (std::size_t i = 0; i < k; ++i) g[i] = f * d[i];
    return g;
}

Matrix hess(const KernelSpec& spec, const Vec& yi, const Vec& yl, bool mixed) {
    check_dims(yi, yl);
    const std::size_t k = yi.size();
    Vec d(k);
    double d2 = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        d[i] = yi[i] - yl[i];
        d2 += d[i] * d[i];
    }
    Matrix h(k, k);
    if (spec.family == KernelFamily::Gaussian) {
        // d^2/dyl^2 exp(-theta*||yi-yl||^2) = 2*theta*k * (2*theta*d*d' - I)
        const double kv = std::exp(-spec.theta * d2);
        const double f = 2.0 * spec.theta * kv;
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j)
                h(i, j) = f * 2.0 * spec.theta * d[i] * d[j];
            h(i, i) -= f;
        }
    } else {
        const double r = std::sqrt(d2);
        if (r < tol::kCoincident) return h;  // zero matrix at the coincidence guard
        // d^2/dyl^2 exp(-theta*r) = theta*k * (theta*u*u' + (u*u' - I)/r), u = d/r
        const double kv = std::exp(-spec.theta * r);
        for (std::size_t i = 0; i < k; ++i) {
            const double ui = d[i] / r;
            for (std::size_t j = 0; j < k; ++j) {
                const double uj = d[j] / r;
                h(i, j) = spec.theta * kv * (spec.theta * ui * uj + ui * uj / r);
            }
            h(i, i) -= spec.theta * kv / r;
        }
    }
    if (mixed) {
        for (double& v : h.data()) v = -v;
    }
    return h;
}

SpectralMoments spectral_moments(const KernelSpec& spec, std::size_t dim) {
    if (spec.family != KernelFamily::Gaussian)
        throw UnsupportedKernelError(
            "spectral_moments: the Laplace spectral measure has an unbounded second moment");
    SpectralMoments m;
    const double kd = static_cast<double>(dim);
    m.c = Matrix(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) m.c(i, i) = 2.0 * spec.theta;
    m.m2 = 2.0 * spec.theta * kd;
    m.m4 = 4.0 * spec.theta * spec.theta * kd * (kd + 2.0);
    m.sigma_min_c = 2.0 * spec.theta;
    return m;
}

}  // namespace kernels
}  // namespace mmdn
