#pragma once

// Discrete L2 Cech-de Rham complex on a cover.
//
// The space of total degree k is the direct sum over p + q = k of q-form
// cochains on every (p+1)-fold intersection. Each summand is a "block"; a
// cochain is one flat vector partitioned by a BlockLayout.

#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "cdr/cover.hpp"

namespace cdr {

/// Summand A^{p,q} restricted to one intersection: Cech degree p, form
/// degree q, and the patch position within level p of the cover.
struct BlockIndex {
    int p = 0;
    int q = 0;
    Index position = 0;

    PatchRef patch() const { return PatchRef{p, position}; }
    auto operator<=>(const BlockIndex&) const = default;
};

/// Ordered blocks of the total-degree-k space with their offsets.
class BlockLayout {
public:
    BlockLayout(const Cover& cover, int degree);

    int degree() const { return degree_; }
    std::size_t num_blocks() const { return blocks_.size(); }
    const std::vector<BlockIndex>& blocks() const { return blocks_; }
    const BlockIndex& block(std::size_t b) const { return blocks_[b]; }
    Index offset(std::size_t b) const { return offsets_[b]; }
    Index block_size(std::size_t b) const { return offsets_[b + 1] - offsets_[b]; }
    Index size() const { return offsets_.back(); }

    /// Block number of patch (p, position), if present in this degree.
    std::optional<std::size_t> find(int p, Index position) const;

    /// Human-readable label, e.g. "p=1,q=0,U(0,1)".
    std::string label(const Cover& cover, std::size_t b) const;

private:
    int degree_;
    std::vector<BlockIndex> blocks_;
    std::vector<Index> offsets_;
};

using LayoutPtr = std::shared_ptr<const BlockLayout>;

/// Element of A^k: one coefficient vector per block, stored contiguously.
class Cochain {
public:
    Cochain() = default;
    Cochain(LayoutPtr layout, Vector values);
    static Cochain zero(LayoutPtr layout);
    static Cochain random(LayoutPtr layout, std::mt19937_64& rng);

    int degree() const { return layout_->degree(); }
    const BlockLayout& layout() const { return *layout_; }
    const LayoutPtr& layout_ptr() const { return layout_; }
    const Vector& values() const { return values_; }
    Vector& values() { return values_; }
    Index size() const { return values_.size(); }

    Eigen::VectorBlock<const Vector> block(std::size_t b) const {
        return values_.segment(layout_->offset(b), layout_->block_size(b));
    }
    Eigen::VectorBlock<Vector> block(std::size_t b) {
        return values_.segment(layout_->offset(b), layout_->block_size(b));
    }

private:
    LayoutPtr layout_;
    Vector values_;
};

/// Per-block, per-top-cell nonnegative multipliers realizing w_k.
class WeightField {
public:
    WeightField() = default;
    /// Throws std::invalid_argument on shape mismatch, negative or
    /// non-finite entries.
    WeightField(LayoutPtr layout, std::vector<Vector> cell_weights);

    static WeightField uniform(const Cover& cover, LayoutPtr layout, double value);

    /// One constant per block, chosen by the callback.
    static WeightField per_block(const Cover& cover, LayoutPtr layout,
                                 const std::function<double(const BlockIndex&, const Patch&)>& value);

    /// Value per cell from the cell barycenter (parent coordinates).
    static WeightField from_function(const Cover& cover, LayoutPtr layout,
                                     const std::function<double(const BlockIndex&, const Point&)>& value);

    int degree() const { return layout_->degree(); }
    const BlockLayout& layout() const { return *layout_; }
    const Vector& cell_weights(std::size_t b) const { return weights_[b]; }
    bool strictly_positive() const;
    WeightField scaled(double factor) const;

private:
    LayoutPtr layout_;
    std::vector<Vector> weights_;
};

class Complex;

/// One weight field per total degree 0..max_degree.
class WeightSet {
public:
    static WeightSet unit(const Complex& complex);

    const WeightField& at(int k) const;
    void set(int k, WeightField field);
    int max_degree() const { return static_cast<int>(fields_.size()) - 1; }

private:
    std::vector<WeightField> fields_;
};

/// Sparse operator between two total degrees, with its block structure.
struct BlockOperator {
    LayoutPtr domain;
    LayoutPtr codomain;
    SparseMatrix matrix;

    /// Sub-matrix mapping domain block `in` to codomain block `out`.
    SparseMatrix block(std::size_t out, std::size_t in) const;
    Cochain apply(const Cochain& x) const;
};

/// Weighted codifferential D*_k = M_{k-1}^{-1} (D^{k-1})^T M_k kept in
/// factored form; apply() performs the mass solve.
class Codifferential {
public:
    Codifferential(int degree, SparseMatrix lower_mass, SparseMatrix weighted_transpose, LayoutPtr domain,
                   LayoutPtr codomain);

    int degree() const { return degree_; }
    const SparseMatrix& lower_mass() const { return lower_mass_; }
    const SparseMatrix& weighted_transpose() const { return weighted_transpose_; }
    const LayoutPtr& domain() const { return domain_; }
    const LayoutPtr& codomain() const { return codomain_; }

    Cochain apply(const Cochain& x) const;
    Vector apply(const Vector& x) const;
    /// Dense matrix of the operator; for small test problems.
    DenseMatrix dense() const;

private:
    int degree_;
    SparseMatrix lower_mass_;
    SparseMatrix weighted_transpose_;
    LayoutPtr domain_;
    LayoutPtr codomain_;
    std::shared_ptr<const linalg::SpdSolver> solver_;
};

/// The four cross terms of the weighted Hodge-Laplacian on A^k, as dense
/// matrices A^k -> A^k.
struct CouplingTerms {
    int degree = 0;
    DenseMatrix d_star_delta;   // d* delta
    DenseMatrix delta_d_star;   // delta d*
    DenseMatrix delta_star_d;   // delta* d
    DenseMatrix d_delta_star;   // d delta*

    /// (-1)^k (d* delta - delta d* + delta* d - d delta*)
    DenseMatrix sum() const;
};

/// Dense weighted Hodge-Laplacians on A^k: the total one and its d / delta
/// parts.
struct Laplacians {
    DenseMatrix total;
    DenseMatrix d_part;
    DenseMatrix delta_part;
};

class Complex {
public:
    explicit Complex(CoverPtr cover);

    const Cover& cover() const { return *cover_; }
    const CoverPtr& cover_ptr() const { return cover_; }
    int dim() const { return cover_->dim(); }
    /// Highest degree with a nonzero space.
    int max_degree() const { return cover_->max_degree(); }

    /// Layout of A^k; empty for k < 0 or k > max_degree.
    LayoutPtr layout(int k) const;

    /// Block-diagonal exterior derivative A^{p,q} -> A^{p,q+1}.
    BlockOperator exterior_derivative(int k) const;
    /// Unsigned Cech difference A^{p,q} -> A^{p+1,q}.
    BlockOperator cech_differential(int k) const;
    /// D^k = d + (-1)^k delta.
    BlockOperator total_derivative(int k) const;

    /// Weighted mass matrix of A^k. Zero weights are rejected unless
    /// allow_degenerate is set (the result is then only semidefinite).
    BlockOperator mass_matrix(int k, const WeightField& w, bool allow_degenerate = false) const;

    /// Rectangular factor G with G^T G = mass_matrix(k, w); defined for
    /// nonnegative weights.
    SparseMatrix mass_factor(int k, const WeightField& w) const;

    /// Weighted adjoint of D^{k-1}; requires positive weights in degree k-1.
    Codifferential codifferential(int k, const WeightSet& weights) const;

    /// Weighted adjoints of the d and delta parts separately.
    Codifferential d_adjoint(int k, const WeightSet& weights) const;
    Codifferential delta_adjoint(int k, const WeightSet& weights) const;

    CouplingTerms coupling_terms(int k, const WeightSet& weights) const;
    Laplacians laplacians(int k, const WeightSet& weights) const;

    Cochain zero(int k) const { return Cochain::zero(layout(k)); }
    Cochain random(int k, std::mt19937_64& rng) const { return Cochain::random(layout(k), rng); }

private:
    Codifferential adjoint_of(const BlockOperator& op, int k, const WeightSet& weights) const;

    CoverPtr cover_;
    std::vector<LayoutPtr> layouts_;
    LayoutPtr empty_;
};

using ComplexPtr = std::shared_ptr<const Complex>;

/// Triplet dump (MatrixMarket coordinate format) of an operator.
void write_matrix_market(std::ostream& out, const SparseMatrix& matrix);

}  // namespace cdr
