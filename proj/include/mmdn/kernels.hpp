#pragma once

#include "mmdn/linalg.hpp"

namespace mmdn {

enum class KernelFamily { Gaussian, Laplace };

// Kernel on objective space, parameterized by a length-scale theta > 0.
//   Gaussian: k(y, y') = exp(-theta * ||y - y'||^2)
//   Laplace:  k(y, y') = exp(-theta * ||y - y'||)
struct KernelSpec {
    KernelFamily family = KernelFamily::Gaussian;
    double theta = 1.0;

    KernelSpec() = default;
    KernelSpec(KernelFamily f, double t);
};

// Second and fourth moments of the spectral measure of a Gaussian kernel in
// dimension k (the measure is N(0, 2*theta*I)).
struct SpectralMoments {
    Matrix c;           // E[w w'] = 2*theta*I
    double m2 = 0.0;    // E||w||^2 = 2*theta*k
    double m4 = 0.0;    // E||w||^4 = 4*theta^2*k*(k+2)
    double sigma_min_c = 0.0;
};

namespace kernels {

double value(const KernelSpec& spec, const Vec& y, const Vec& y2);

// d k(yi, yl) / d yl. For the Laplace kernel the subgradient 0 is returned
// when the points coincide to within tol::kCoincident.
Vec grad(const KernelSpec& spec, const Vec& yi, const Vec& yl);

// d^2 k(yi, yl) / d yl d yl (the "own" second derivative). For stationary
// kernels the mixed block d^2 k / d yi d yl is the negation; pass
// mixed = true to get that one directly.
Matrix hess(const KernelSpec& spec, const Vec& yi, const Vec& yl, bool mixed = false);

SpectralMoments spectral_moments(const KernelSpec& spec, std::size_t dim);

}  // namespace kernels
}  // namespace mmdn
