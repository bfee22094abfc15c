#pragma once

// Hodge-Laplace problems on the discrete Cech-de Rham complex, plus the
// harmonic space and Poincare constant analysis built on them.

#include <string>
#include <vector>

#include "cdr/complex.hpp"

namespace cdr {

/// Degree-k operator bundle: everything a Laplace solve or a time step
/// needs, assembled once.
struct DegreeOperators {
    int degree = 0;
    LayoutPtr lower;   // A^{k-1}
    LayoutPtr layout;  // A^k
    LayoutPtr upper;   // A^{k+1}
    SparseMatrix mass_lower;  // M_{k-1}
    SparseMatrix mass;        // M_k
    SparseMatrix mass_upper;  // M_{k+1}, possibly only semidefinite
    SparseMatrix d_lower;     // D^{k-1}: A^{k-1} -> A^k
    SparseMatrix d;           // D^k: A^k -> A^{k+1}
    SparseMatrix stiffness;   // (D^k)^T M_{k+1} D^k
    SparseMatrix coupling;    // M_k D^{k-1}, the off-diagonal mixed block
};

/// Assemble the bundle. With allow_degenerate the weights of degree k+1
/// may vanish on some cells (only the energy term becomes semidefinite).
DegreeOperators assemble_operators(const Complex& complex, int k, const WeightSet& weights,
                                   bool allow_degenerate = false);

struct HodgeProblem {
    ComplexPtr complex;
    int degree = 0;
    WeightSet weights;
    Cochain source;
    /// Permit zero weights in degree k+1 (e.g. switched-off exchange).
    bool allow_degenerate = false;
};

/// M_k-orthonormal basis of ker D^k intersected with ker D*_k.
struct HarmonicBasis {
    int degree = 0;
    LayoutPtr layout;
    DenseMatrix vectors;  // one basis vector per column

    Index dimension() const { return vectors.cols(); }
    Cochain vector(Index j) const { return Cochain(layout, vectors.col(j)); }
};

inline constexpr double kHarmonicTolerance = 1e-8;

/// Null space of the stacked matrix [G_{k+1} D^k ; L_{k-1}^{-1} (D^{k-1})^T M_k]
/// in the M_k-whitened coordinates, G_{k+1}^T G_{k+1} = M_{k+1}. Throws
/// SizeLimitError beyond the dense budget.
HarmonicBasis harmonic_basis(const Complex& complex, int k, const WeightSet& weights,
                             bool allow_degenerate = false, double rel_tol = kHarmonicTolerance);

/// dim A^k - rank D^k - rank D^{k-1} for k = 0..max_degree, using exact
/// integer ranks.
std::vector<Index> cohomology_dims(const Complex& complex);

struct HodgeSolution {
    Cochain alpha;
    Cochain beta;   // D^k alpha
    Cochain gamma;  // D*_k alpha
    /// Relative residual of the saddle-point system.
    double system_residual = 0.0;
    /// ||M (Laplace(alpha) - projected source)|| / ||M projected source||.
    double laplacian_residual = 0.0;
    /// max |H^T M_k alpha|.
    double harmonic_orthogonality = 0.0;
    Index kernel_dim = 0;
    /// Coefficients H^T M_k phi of the source in the harmonic basis.
    Vector harmonic_coefficients;
    double harmonic_norm = 0.0;
    bool source_projected = false;
    std::vector<std::string> warnings;
};

/// Sources whose harmonic part exceeds this (relative) are projected.
inline constexpr double kSourceHarmonicTolerance = 1e-10;

/// Primal k = 0 solve with the harmonic multiplier.
HodgeSolution solve_primal_k0(const HodgeProblem& problem);

/// Mixed (gamma, alpha, multiplier) solve for any admissible degree.
HodgeSolution solve_mixed(const HodgeProblem& problem);

struct HodgeDecomposition {
    Cochain exact;
    Cochain harmonic;
    Cochain coexact;
    Cochain potential;  // eta with D^{k-1} eta = exact
};

/// Orthogonal decomposition in the weighted inner product of degree k.
/// Caches the dense factorizations so many cochains can be split cheaply.
class HodgeDecomposer {
public:
    HodgeDecomposer(const Complex& complex, int k, const WeightSet& weights);

    HodgeDecomposition decompose(const Cochain& omega) const;
    const HarmonicBasis& harmonic() const { return harmonic_; }
    const SparseMatrix& mass() const { return mass_; }

private:
    int degree_;
    LayoutPtr lower_;
    LayoutPtr layout_;
    SparseMatrix mass_;
    SparseMatrix d_lower_;
    DenseMatrix chol_t_;         // L_k^T
    DenseMatrix whitened_pinv_;  // pseudo-inverse of L_k^T D^{k-1}
    HarmonicBasis harmonic_;
};

HodgeDecomposition hodge_decompose(const Complex& complex, int k, const WeightSet& weights, const Cochain& omega);

/// Smallest C with ||alpha|| <= C ||D^k alpha|| on the weighted complement
/// of ker D^k. Throws std::domain_error when D^k vanishes identically.
double poincare_constant(const Complex& complex, int k, const WeightSet& weights);

/// Weighted inner product <x, y>_M.
double inner(const SparseMatrix& mass, const Vector& x, const Vector& y);
double norm(const SparseMatrix& mass, const Vector& x);

}  // namespace cdr
