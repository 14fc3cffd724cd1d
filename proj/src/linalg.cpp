#include "mmdn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mmdn/errors.hpp"
#include "mmdn/tolerances.hpp"

namespace mmdn {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

namespace linalg {

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw ContractViolation("dot: size mismatch");
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vec& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::fabs(v));
    return m;
}

Vec operator_axpy(double alpha, const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw ContractViolation("axpy: size mismatch");
    Vec r(y);
    for (std::size_t i = 0; i < x.size(); ++i) r[i] += alpha * x[i];
    return r;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ContractViolation("matmul: shape mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.row_ptr(k);
            double* crow = c.row_ptr(i);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Vec matvec(const Matrix& a, const Vec& x) {
    if (a.cols() != x.size()) throw ContractViolation("matvec: shape mismatch");
    Vec y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* row = a.row_ptr(i);
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += row[j] * x[j];
        y[i] = s;
    }
    return y;
}

double frobenius(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::fabs(v));
    return m;
}

Matrix symmetrize(const Matrix& a) {
    if (a.rows() != a.cols()) throw ContractViolation("symmetrize: matrix not square");
    const double scale = std::max(max_abs(a), 1.0);
    Matrix s(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double asym = std::fabs(a(i, j) - a(j, i));
            if (asym > tol::kSymmetryRel * scale)
                throw ContractViolation("symmetrize: input asymmetric beyond tolerance");
            const double v = 0.5 * (a(i, j) + a(j, i));
            s(i, j) = v;
            s(j, i) = v;
        }
    }
    return s;
}

std::optional<Matrix> cholesky(const Matrix& a) {
    const Matrix s = symmetrize(a);
    const std::size_t n = s.rows();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = s(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= 0.0 || !std::isfinite(d)) return std::nullopt;
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = s(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
            l(i, j) = v / ljj;
        }
    }
    return l;
}

Vec cholesky_solve(const Matrix& lower, const Vec& b) {
    const std::size_t n = lower.rows();
    if (b.size() != n) throw ContractViolation("cholesky_solve: size mismatch");
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= lower(i, k) * y[k];
        y[i] = s / lower(i, i);
    }
    Vec x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= lower(k, ii) * x[k];
        x[ii] = s / lower(ii, ii);
    }
    return x;
}

Vec solve(const Matrix& a, const Vec& b) {
    if (a.rows() != a.cols()) throw ContractViolation("solve: matrix not square");
    if (a.rows() != b.size()) throw ContractViolation("solve: rhs size mismatch");
    const std::size_t n = a.rows();
    Matrix lu = a;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::fabs(lu(col, col));
        for (std::size_t i = col + 1; i < n; ++i) {
            const double v = std::fabs(lu(i, col));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(col, j), lu(piv, j));
            std::swap(perm[col], perm[piv]);
        }
        const double p = lu(col, col);
        if (p == 0.0) throw SingularMatrixError(std::numeric_limits<double>::infinity());
        for (std::size_t i = col + 1; i < n; ++i) {
            const double f = lu(i, col) / p;
            lu(i, col) = f;
            if (f == 0.0) continue;
            for (std::size_t j = col + 1; j < n; ++j) lu(i, j) -= f * lu(col, j);
        }
    }

    // diagonal-ratio condition estimate; crude but enough to refuse garbage
    double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::fabs(lu(i, i));
        dmax = std::max(dmax, d);
        dmin = std::min(dmin, d);
    }
    const double cond = dmin > 0.0 ? dmax / dmin : std::numeric_limits<double>::infinity();
    if (cond > tol::kConditionLimit) throw SingularMatrixError(cond);

    Vec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm[i]];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < i; ++k) x[i] -= lu(i, k) * x[k];
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t k = ii + 1; k < n; ++k) x[ii] -= lu(ii, k) * x[k];
        x[ii] /= lu(ii, ii);
    }
    return x;
}

QrResult qr(const Matrix& a) {
    const std::size_t m = a.rows(), n = a.cols();
    Matrix r = a;
    Matrix q = Matrix::identity(m);
    Vec v(m);
    for (std::size_t col = 0; col < std::min(m, n); ++col) {
        double norm = 0.0;
        for (std::size_t i = col; i < m; ++i) norm += r(i, col) * r(i, col);
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;  // rank deficiency: leave a zero diagonal in R

        const double alpha = r(col, col) >= 0.0 ? -norm : norm;
        double vnorm2 = 0.0;
        for (std::size_t i = col; i < m; ++i) {
            v[i] = r(i, col);
            if (i == col) v[i] -= alpha;
            vnorm2 += v[i] * v[i];
        }
        if (vnorm2 == 0.0) continue;

        // apply H = I - 2 v v'/v'v to R (left) and accumulate into Q (right)
        for (std::size_t j = col; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = col; i < m; ++i) s += v[i] * r(i, j);
            const double f = 2.0 * s / vnorm2;
            for (std::size_t i = col; i < m; ++i) r(i, j) -= f * v[i];
        }
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (std::size_t j = col; j < m; ++j) s += q(i, j) * v[j];
            const double f = 2.0 * s / vnorm2;
            for (std::size_t j = col; j < m; ++j) q(i, j) -= f * v[j];
        }
    }
    // clean the strictly-lower part of R to exact zero
    for (std::size_t i = 1; i < m; ++i)
        for (std::size_t j = 0; j < std::min(i, n); ++j) r(i, j) = 0.0;
    return {std::move(q), std::move(r)};
}

linalg::SymEigResult sym_eigenvalues(const Matrix& a) {
    Matrix s = symmetrize(a);
    const std::size_t n = s.rows();
    Matrix q = Matrix::identity(n);

    const double fro = frobenius(s);
    const double stop = std::max(fro, 1.0) * 1e-15;

    for (int sweep = 0; sweep < tol::kJacobiMaxSweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t r = p + 1; r < n; ++r) off += s(p, r) * s(p, r);
        if (std::sqrt(2.0 * off) <= stop) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t r = p + 1; r < n; ++r) {
                const double apq = s(p, r);
                if (std::fabs(apq) <= stop / (static_cast<double>(n) * n)) continue;
                const double app = s(p, p), aqq = s(r, r);
                const double theta = 0.5 * (aqq - app) / apq;
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double skp = s(k, p), skq = s(k, r);
                    s(k, p) = c * skp - sn * skq;
                    s(k, r) = sn * skp + c * skq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double spk = s(p, k), sqk = s(r, k);
                    s(p, k) = c * spk - sn * sqk;
                    s(r, k) = sn * spk + c * sqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double qkp = q(k, p), qkq = q(k, r);
                    q(k, p) = c * qkp - sn * qkq;
                    q(k, r) = sn * qkp + c * qkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return s(i, i) < s(j, j); });

    SymEigResult res;
    res.eigenvalues.resize(n);
    res.eigenvectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        res.eigenvalues[j] = s(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) res.eigenvectors(i, j) = q(i, order[j]);
    }
    return res;
}

namespace {

// Rayleigh-quotient power iteration; `solver` maps v -> A v (or A^{-1} v).
template <typename Apply>
double dominant_eigenvalue(std::size_t n, Apply&& apply) {
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i % 7);
    double nv = norm2(v);
    for (double& x : v) x /= nv;

    double lambda = 0.0;
    for (int it = 0; it < tol::kPowerIterMax; ++it) {
        Vec w = apply(v);
        const double next = dot(v, w);
        const double nw = norm2(w);
        if (nw == 0.0) return 0.0;
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
        if (it > 2 && std::fabs(next - lambda) <= tol::kPowerIterRel * std::fabs(next)) {
            return next;
        }
        lambda = next;
    }
    return lambda;
}

}  // namespace

double condition_number(const Matrix& a) {
    auto l = cholesky(a);
    if (!l) throw ContractViolation("condition_number: matrix is not positive definite");
    const std::size_t n = a.rows();
    if (n <= 64) {
        const auto eig = sym_eigenvalues(a);
        return eig.eigenvalues.back() / eig.eigenvalues.front();
    }
    const Matrix s = symmetrize(a);
    const double lmax = dominant_eigenvalue(n, [&](const Vec& v) { return matvec(s, v); });
    const double inv_lmin =
        dominant_eigenvalue(n, [&](const Vec& v) { return cholesky_solve(*l, v); });
    return lmax * inv_lmin;
}

}  // namespace linalg
}  // namespace mmdn
