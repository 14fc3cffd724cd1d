#pragma once

// All numeric tolerances used across the library live here so that the
// contracts they implement can be audited (and changed) in one place.

namespace mmdn::tol {

// linalg
inline constexpr double kSymmetryRel = 1e-12;      // max allowed relative asymmetry before symmetrize() refuses
inline constexpr double kConditionLimit = 1e14;    // solve() refuses systems estimated worse than this
inline constexpr double kOrthogonality = 1e-10;    // Q'Q - I bound promised by qr()
inline constexpr int kJacobiMaxSweeps = 64;
inline constexpr int kPowerIterMax = 2000;
inline constexpr double kPowerIterRel = 1e-12;

// kernels
inline constexpr double kCoincident = 1e-12;       // Laplace gradient/Hessian guard radius

// newton
inline constexpr double kPrecondBeta = 1e-6;       // initial diagonal shift target (Nocedal alg. 3.3)
inline constexpr int kPrecondMaxAttempts = 60;
inline constexpr double kArmijoC1 = 1e-4;
inline constexpr int kArmijoMaxHalvings = 25;
inline constexpr double kActiveTol = 1e-6;         // default activity detection tolerance
inline constexpr double kDefaultEps = 1e-6;        // gradient-norm stopping threshold

// refset
inline constexpr double kDegenerateQr = 1e-10;     // rank test on the extreme-point matrix

}  // namespace mmdn::tol
