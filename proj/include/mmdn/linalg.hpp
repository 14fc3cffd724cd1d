#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace mmdn {

using Vec = std::vector<double>;

// Dense row-major matrix. Sizes in this project stay at a few hundred rows,
// so every algorithm below is the plain unblocked textbook version.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }
    const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }

    Vec& data() { return data_; }
    const Vec& data() const { return data_; }

  private:
    std::size_t rows_ = 0, cols_ = 0;
    Vec data_;
};

namespace linalg {

// vector helpers
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm_inf(const Vec& a);
Vec operator_axpy(double alpha, const Vec& x, const Vec& y);  // alpha*x + y

Matrix transpose(const Matrix& a);
Matrix matmul(const Matrix& a, const Matrix& b);
Vec matvec(const Matrix& a, const Vec& x);
double frobenius(const Matrix& a);
double max_abs(const Matrix& a);

// (A + A')/2 if the relative asymmetry is below tol::kSymmetryRel, else throws
// ContractViolation. Guards the factorizations against drift from
// floating-point Hessian assembly.
Matrix symmetrize(const Matrix& a);

// Lower-triangular L with L L' = A, or nullopt when a non-positive pivot is
// met (A not positive definite). Throws on non-square/asymmetric input.
std::optional<Matrix> cholesky(const Matrix& a);

// Solve L L' x = b given the Cholesky factor.
Vec cholesky_solve(const Matrix& lower, const Vec& b);

// General dense solve via LU with partial pivoting. Throws
// SingularMatrixError (carrying a diagonal-ratio condition estimate) when the
// system is singular to working precision.
Vec solve(const Matrix& a, const Vec& b);

struct QrResult {
    Matrix q;  // m x m orthogonal
    Matrix r;  // m x n upper triangular
};

// Full Householder QR of an m x n matrix (m >= n). The trailing columns of Q
// span the orthogonal complement of the column space when A has full rank.
QrResult qr(const Matrix& a);

struct SymEigResult {
    Vec eigenvalues;      // ascending
    Matrix eigenvectors;  // orthonormal columns, matching order
};

// Cyclic Jacobi eigensolver for symmetric matrices.
SymEigResult sym_eigenvalues(const Matrix& a);

// max-eigenvalue / min-eigenvalue of a symmetric positive-definite matrix.
// Positive definiteness is verified via Cholesky first. Small matrices go
// through the Jacobi solver; large ones use power/inverse-power iteration.
double condition_number(const Matrix& a);

}  // namespace linalg
}  // namespace mmdn
