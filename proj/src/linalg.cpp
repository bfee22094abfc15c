#include "cdr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace cdr::linalg {

namespace {

constexpr int kMaxRefinementSteps = 4;

double relative_residual(const SparseMatrix& a, const Vector& x, const Vector& b) {
    const double bnorm = b.norm();
    const double rnorm = (a * x - b).norm();
    if (bnorm == 0.0) {
        return rnorm;
    }
    return rnorm / bnorm;
}

}  // namespace

struct SymmetricSolver::Impl {
    SparseMatrix matrix;
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<Index>> lu;
};

SymmetricSolver::SymmetricSolver(const SparseMatrix& system, double tolerance)
    : impl_(std::make_unique<Impl>()), tolerance_(tolerance) {
    if (system.rows() != system.cols()) {
        throw std::invalid_argument("solve_symmetric: system matrix is not square");
    }
    impl_->matrix = system;
    impl_->matrix.makeCompressed();
    if (system.rows() == 0) {
        return;
    }
    impl_->lu.analyzePattern(impl_->matrix);
    impl_->lu.factorize(impl_->matrix);
    if (impl_->lu.info() != Eigen::Success) {
        throw SingularSystemError("solve_symmetric: factorization failed (" + impl_->lu.lastErrorMessage() +
                                  ")");
    }
}

SymmetricSolver::~SymmetricSolver() = default;
SymmetricSolver::SymmetricSolver(SymmetricSolver&&) noexcept = default;
SymmetricSolver& SymmetricSolver::operator=(SymmetricSolver&&) noexcept = default;

Index SymmetricSolver::size() const { return impl_->matrix.rows(); }

Vector SymmetricSolver::solve(const Vector& rhs) const {
    const SparseMatrix& a = impl_->matrix;
    if (rhs.size() != a.rows()) {
        throw std::invalid_argument("solve_symmetric: rhs length does not match system");
    }
    if (a.rows() == 0) {
        return Vector();
    }
    Vector x = impl_->lu.solve(rhs);
    if (!x.allFinite()) {
        throw SingularSystemError("solve_symmetric: non-finite solution (singular system)");
    }
    double res = relative_residual(a, x, rhs);
    for (int step = 0; step < kMaxRefinementSteps && res > 0.01 * tolerance_; ++step) {
        const Vector r = rhs - a * x;
        const Vector dx = impl_->lu.solve(r);
        if (!dx.allFinite()) {
            break;
        }
        const Vector candidate = x + dx;
        const double cres = relative_residual(a, candidate, rhs);
        if (cres >= res) {
            break;
        }
        x = candidate;
        res = cres;
    }
    if (res > tolerance_) {
        std::ostringstream msg;
        msg << "solve_symmetric: relative residual " << res << " exceeds " << tolerance_
            << " (system numerically singular)";
        throw SingularSystemError(msg.str());
    }
    return x;
}

DenseMatrix SymmetricSolver::solve(const DenseMatrix& rhs) const {
    DenseMatrix out(rhs.rows(), rhs.cols());
    for (Index c = 0; c < rhs.cols(); ++c) {
        out.col(c) = solve(Vector(rhs.col(c)));
    }
    return out;
}

struct SpdSolver::Impl {
    Index n = 0;
    Eigen::SimplicialLLT<SparseMatrix> llt;
};

SpdSolver::SpdSolver(const SparseMatrix& system) : impl_(std::make_unique<Impl>()) {
    if (system.rows() != system.cols()) {
        throw std::invalid_argument("SpdSolver: matrix is not square");
    }
    impl_->n = system.rows();
    if (impl_->n == 0) {
        return;
    }
    impl_->llt.compute(system);
    if (impl_->llt.info() != Eigen::Success) {
        throw SingularSystemError("SpdSolver: Cholesky factorization failed (matrix not positive definite)");
    }
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

Index SpdSolver::size() const { return impl_->n; }

Vector SpdSolver::solve(const Vector& rhs) const {
    if (impl_->n == 0) {
        return Vector();
    }
    return impl_->llt.solve(rhs);
}

DenseMatrix SpdSolver::solve(const DenseMatrix& rhs) const {
    if (impl_->n == 0) {
        return DenseMatrix(0, rhs.cols());
    }
    return impl_->llt.solve(rhs);
}

Vector solve_symmetric(const SparseMatrix& system, const Vector& rhs) {
    return SymmetricSolver(system).solve(rhs);
}

DenseMatrix nullspace_matrix(const DenseMatrix& matrix, double rel_tol) {
    const Index n = matrix.cols();
    if (n == 0) {
        return DenseMatrix(0, 0);
    }
    if (matrix.rows() == 0 || matrix.cwiseAbs().maxCoeff() == 0.0) {
        return DenseMatrix::Identity(n, n);
    }
    // Pad to at least n rows so the full V is available.
    DenseMatrix work = matrix;
    if (work.rows() < n) {
        work.conservativeResize(n, Eigen::NoChange);
        work.bottomRows(n - matrix.rows()).setZero();
    }
    Eigen::BDCSVD<DenseMatrix> svd(work, Eigen::ComputeFullV);
    const Vector& sigma = svd.singularValues();
    const double cutoff = rel_tol * sigma(0);
    Index rank = 0;
    while (rank < sigma.size() && sigma(rank) > cutoff) {
        ++rank;
    }
    return svd.matrixV().rightCols(n - rank);
}

std::vector<Vector> nullspace(const DenseMatrix& matrix, double rel_tol) {
    const DenseMatrix basis = nullspace_matrix(matrix, rel_tol);
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(basis.cols()));
    for (Index c = 0; c < basis.cols(); ++c) {
        out.emplace_back(basis.col(c));
    }
    return out;
}

Vector singular_values(const DenseMatrix& matrix) {
    if (matrix.size() == 0) {
        return Vector();
    }
    Eigen::BDCSVD<DenseMatrix> svd(matrix);
    return svd.singularValues();
}

namespace {

using u64 = std::uint64_t;

u64 mulmod(u64 a, u64 b, u64 p) { return static_cast<u64>((static_cast<unsigned __int128>(a) * b) % p); }

u64 powmod(u64 base, u64 exp, u64 p) {
    u64 result = 1;
    base %= p;
    while (exp > 0) {
        if (exp & 1U) {
            result = mulmod(result, base, p);
        }
        base = mulmod(base, base, p);
        exp >>= 1U;
    }
    return result;
}

Index rank_mod_p(const DenseMatrix& matrix, u64 p) {
    const Index rows = matrix.rows();
    const Index cols = matrix.cols();
    std::vector<u64> a(static_cast<std::size_t>(rows * cols));
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            const auto v = static_cast<long long>(std::llround(matrix(r, c)));
            const long long m = v % static_cast<long long>(p);
            a[static_cast<std::size_t>(r * cols + c)] = static_cast<u64>(m < 0 ? m + static_cast<long long>(p) : m);
        }
    }
    auto at = [&](Index r, Index c) -> u64& { return a[static_cast<std::size_t>(r * cols + c)]; };
    Index rank = 0;
    for (Index c = 0; c < cols && rank < rows; ++c) {
        Index pivot = -1;
        for (Index r = rank; r < rows; ++r) {
            if (at(r, c) != 0) {
                pivot = r;
                break;
            }
        }
        if (pivot < 0) {
            continue;
        }
        if (pivot != rank) {
            for (Index k = c; k < cols; ++k) {
                std::swap(at(pivot, k), at(rank, k));
            }
        }
        const u64 inv = powmod(at(rank, c), p - 2, p);
        for (Index r = rank + 1; r < rows; ++r) {
            const u64 f = at(r, c);
            if (f == 0) {
                continue;
            }
            const u64 factor = mulmod(f, inv, p);
            for (Index k = c; k < cols; ++k) {
                const u64 sub = mulmod(factor, at(rank, k), p);
                u64& dst = at(r, k);
                dst = dst >= sub ? dst - sub : dst + p - sub;
            }
        }
        ++rank;
    }
    return rank;
}

}  // namespace

Index integer_rank(const DenseMatrix& matrix) {
    if (matrix.size() == 0) {
        return 0;
    }
    for (Index r = 0; r < matrix.rows(); ++r) {
        for (Index c = 0; c < matrix.cols(); ++c) {
            const double v = matrix(r, c);
            if (!std::isfinite(v) || v != std::round(v) || std::abs(v) > 1e15) {
                throw std::invalid_argument("integer_rank: matrix has non-integer entries");
            }
        }
    }
    // Rank mod p never exceeds the rational rank; two large primes make a
    // drop in both vanishingly unlikely for small-entry matrices.
    return std::max(rank_mod_p(matrix, 2147483647ULL), rank_mod_p(matrix, 1000000007ULL));
}

DenseMatrix least_squares(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() == 0) {
        return DenseMatrix(0, b.cols());
    }
    Eigen::CompleteOrthogonalDecomposition<DenseMatrix> cod(a);
    return cod.solve(b);
}

DenseMatrix pseudo_inverse(const DenseMatrix& a) {
    if (a.size() == 0) {
        return DenseMatrix::Zero(a.cols(), a.rows());
    }
    Eigen::CompleteOrthogonalDecomposition<DenseMatrix> cod(a);
    return cod.pseudoInverse();
}

DenseMatrix cholesky_lower(const DenseMatrix& spd) {
    if (spd.rows() == 0) {
        return DenseMatrix(0, 0);
    }
    Eigen::LLT<DenseMatrix> llt(spd);
    if (llt.info() != Eigen::Success) {
        throw SingularSystemError("cholesky_lower: matrix not positive definite");
    }
    return llt.matrixL();
}

DenseMatrix solve_lower(const DenseMatrix& l, const DenseMatrix& b) {
    if (l.rows() == 0) {
        return DenseMatrix(0, b.cols());
    }
    return l.triangularView<Eigen::Lower>().solve(b);
}

DenseMatrix solve_lower_transpose(const DenseMatrix& l, const DenseMatrix& b) {
    if (l.rows() == 0) {
        return DenseMatrix(0, b.cols());
    }
    return l.transpose().triangularView<Eigen::Upper>().solve(b);
}

void require_dense_budget(Index n, const std::string& what) {
    if (n > kDenseBudget) {
        std::ostringstream msg;
        msg << what << ": dimension " << n << " exceeds dense budget " << kDenseBudget;
        throw SizeLimitError(msg.str());
    }
}

SparseMatrix identity(Index n) {
    SparseMatrix id(n, n);
    id.setIdentity();
    return id;
}

SparseMatrix sparse_from_dense(const DenseMatrix& dense) {
    std::vector<Triplet> trips;
    for (Index c = 0; c < dense.cols(); ++c) {
        for (Index r = 0; r < dense.rows(); ++r) {
            if (dense(r, c) != 0.0) {
                trips.emplace_back(r, c, dense(r, c));
            }
        }
    }
    SparseMatrix out(dense.rows(), dense.cols());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

bool is_integer_valued(const SparseMatrix& matrix) {
    for (Index k = 0; k < matrix.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(matrix, k); it; ++it) {
            if (it.value() != std::round(it.value())) {
                return false;
            }
        }
    }
    return true;
}

SparseMatrix integer_product(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("integer_product: inner dimensions differ");
    }
    if (!is_integer_valued(a) || !is_integer_valued(b)) {
        throw std::invalid_argument("integer_product: operands must be integer valued");
    }
    std::map<std::pair<Index, Index>, std::int64_t> acc;
    for (Index col = 0; col < b.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator bit(b, col); bit; ++bit) {
            const auto bv = static_cast<std::int64_t>(bit.value());
            // column `bit.row()` of a
            for (SparseMatrix::InnerIterator ait(a, bit.row()); ait; ++ait) {
                acc[{ait.row(), col}] += static_cast<std::int64_t>(ait.value()) * bv;
            }
        }
    }
    std::vector<Triplet> trips;
    for (const auto& [rc, v] : acc) {
        if (v != 0) {
            trips.emplace_back(rc.first, rc.second, static_cast<double>(v));
        }
    }
    SparseMatrix out(a.rows(), b.cols());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

Index structural_nonzeros(const SparseMatrix& matrix) {
    Index count = 0;
    for (Index k = 0; k < matrix.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(matrix, k); it; ++it) {
            if (it.value() != 0.0) {
                ++count;
            }
        }
    }
    return count;
}

}  // namespace cdr::linalg
