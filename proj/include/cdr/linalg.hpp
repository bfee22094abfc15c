#pragma once

// Sparse/dense kernels shared by the rest of the library. Eigen does the
// heavy lifting; this header fixes the types and the few solver entry
// points everything else goes through.

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace cdr {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, Index>;
using Triplet = Eigen::Triplet<double, Index>;

/// Raised when a factorization hits a vanishing pivot or a solve cannot
/// reach the requested residual.
class SingularSystemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a dense computation would exceed the configured budget.
class SizeLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace linalg {

/// Largest dimension a dense null-space / eigen computation accepts.
inline constexpr Index kDenseBudget = 5000;

inline constexpr double kSolveTolerance = 1e-10;

/// Factor-once, solve-many direct solver for square (possibly indefinite)
/// symmetric systems. Every solve is checked against
/// ||Ax - b|| <= tol * ||b|| and refined iteratively when needed.
class SymmetricSolver {
public:
    explicit SymmetricSolver(const SparseMatrix& system, double tolerance = kSolveTolerance);
    ~SymmetricSolver();
    SymmetricSolver(SymmetricSolver&&) noexcept;
    SymmetricSolver& operator=(SymmetricSolver&&) noexcept;

    Vector solve(const Vector& rhs) const;
    DenseMatrix solve(const DenseMatrix& rhs) const;

    Index size() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    double tolerance_;
};

/// Sparse Cholesky for symmetric positive definite matrices (mass matrices).
class SpdSolver {
public:
    explicit SpdSolver(const SparseMatrix& system);
    ~SpdSolver();
    SpdSolver(SpdSolver&&) noexcept;
    SpdSolver& operator=(SpdSolver&&) noexcept;

    Vector solve(const Vector& rhs) const;
    DenseMatrix solve(const DenseMatrix& rhs) const;
    Index size() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around SymmetricSolver.
Vector solve_symmetric(const SparseMatrix& system, const Vector& rhs);

/// Orthonormal basis (as columns) of right singular vectors whose singular
/// value is <= rel_tol * sigma_max. A zero matrix has a full null space.
DenseMatrix nullspace_matrix(const DenseMatrix& matrix, double rel_tol);

/// Same as nullspace_matrix, one vector per basis element.
std::vector<Vector> nullspace(const DenseMatrix& matrix, double rel_tol);

/// Singular values in decreasing order.
Vector singular_values(const DenseMatrix& matrix);

/// Exact rank of an integer-valued matrix via modular Gaussian elimination.
/// Entries must be integers (checked).
Index integer_rank(const DenseMatrix& matrix);

/// Minimum-norm least-squares solution of min ||A x - b||.
DenseMatrix least_squares(const DenseMatrix& a, const DenseMatrix& b);

/// Moore-Penrose pseudo-inverse (rank-revealing, default threshold).
DenseMatrix pseudo_inverse(const DenseMatrix& a);

/// Lower Cholesky factor L of a dense SPD matrix, M = L L^T.
DenseMatrix cholesky_lower(const DenseMatrix& spd);

/// Forward substitution L X = B with L lower triangular.
DenseMatrix solve_lower(const DenseMatrix& l, const DenseMatrix& b);

/// Back substitution L^T X = B with L lower triangular.
DenseMatrix solve_lower_transpose(const DenseMatrix& l, const DenseMatrix& b);

/// Throws SizeLimitError when n exceeds the dense budget.
void require_dense_budget(Index n, const std::string& what);

SparseMatrix identity(Index n);
SparseMatrix sparse_from_dense(const DenseMatrix& dense);

/// True when every stored value of the matrix is an integer.
bool is_integer_valued(const SparseMatrix& matrix);

/// Exact product of two integer-valued sparse matrices computed in 64-bit
/// integer arithmetic. Returns the result converted back to double.
SparseMatrix integer_product(const SparseMatrix& a, const SparseMatrix& b);

/// Number of entries with |value| > 0 after dropping exact zeros.
Index structural_nonzeros(const SparseMatrix& matrix);

}  // namespace linalg
}  // namespace cdr
