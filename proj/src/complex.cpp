#include "cdr/complex.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "cdr/forms.hpp"

namespace cdr {

namespace {

int sign_of(int k) { return (k % 2 == 0) ? 1 : -1; }

void add_block(std::vector<Triplet>& trips, const SparseMatrix& m, Index row0, Index col0, double scale) {
    for (Index c = 0; c < m.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
            trips.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
        }
    }
}

SparseMatrix from_triplets(Index rows, Index cols, const std::vector<Triplet>& trips) {
    SparseMatrix m(rows, cols);
    m.setFromTriplets(trips.begin(), trips.end());
    m.prune(0.0);
    m.makeCompressed();
    return m;
}

DenseMatrix dense_of(const SparseMatrix& m) { return DenseMatrix(m); }

}  // namespace

// ---------------------------------------------------------------- layout

BlockLayout::BlockLayout(const Cover& cover, int degree) : degree_(degree) {
    offsets_.push_back(0);
    for (int p = 0; p <= cover.max_level(); ++p) {
        const int q = degree - p;
        if (q < 0 || q > cover.dim()) {
            continue;
        }
        const auto& lvl = cover.level(p);
        for (Index pos = 0; pos < static_cast<Index>(lvl.size()); ++pos) {
            blocks_.push_back(BlockIndex{p, q, pos});
            offsets_.push_back(offsets_.back() + lvl[static_cast<std::size_t>(pos)].submesh.num_simplices(q));
        }
    }
}

std::optional<std::size_t> BlockLayout::find(int p, Index position) const {
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        if (blocks_[b].p == p && blocks_[b].position == position) {
            return b;
        }
    }
    return std::nullopt;
}

std::string BlockLayout::label(const Cover& cover, std::size_t b) const {
    const BlockIndex& blk = blocks_.at(b);
    std::ostringstream out;
    out << "p=" << blk.p << ",q=" << blk.q << ",U(" << cover.patch(blk.patch()).index.to_string() << ")";
    return out.str();
}

// ---------------------------------------------------------------- cochain

Cochain::Cochain(LayoutPtr layout, Vector values) : layout_(std::move(layout)), values_(std::move(values)) {
    if (!layout_ || values_.size() != layout_->size()) {
        throw std::invalid_argument("Cochain: value length does not match layout");
    }
}

Cochain Cochain::zero(LayoutPtr layout) {
    const Index n = layout->size();
    return Cochain(std::move(layout), Vector::Zero(n));
}

Cochain Cochain::random(LayoutPtr layout, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Vector v(layout->size());
    for (Index i = 0; i < v.size(); ++i) {
        v(i) = dist(rng);
    }
    return Cochain(std::move(layout), std::move(v));
}

// ---------------------------------------------------------------- weights

WeightField::WeightField(LayoutPtr layout, std::vector<Vector> cell_weights)
    : layout_(std::move(layout)), weights_(std::move(cell_weights)) {
    if (!layout_ || weights_.size() != layout_->num_blocks()) {
        throw std::invalid_argument("WeightField: one weight vector per block required");
    }
    for (const auto& w : weights_) {
        for (Index c = 0; c < w.size(); ++c) {
            if (!std::isfinite(w(c)) || w(c) < 0.0) {
                throw std::invalid_argument("WeightField: weights must be finite and nonnegative");
            }
        }
    }
}

WeightField WeightField::uniform(const Cover& cover, LayoutPtr layout, double value) {
    return per_block(cover, std::move(layout), [value](const BlockIndex&, const Patch&) { return value; });
}

WeightField WeightField::per_block(const Cover& cover, LayoutPtr layout,
                                   const std::function<double(const BlockIndex&, const Patch&)>& value) {
    std::vector<Vector> w;
    for (const auto& blk : layout->blocks()) {
        const Patch& patch = cover.patch(blk.patch());
        w.push_back(Vector::Constant(static_cast<Index>(patch.submesh.cells().size()), value(blk, patch)));
    }
    return WeightField(std::move(layout), std::move(w));
}

WeightField WeightField::from_function(const Cover& cover, LayoutPtr layout,
                                       const std::function<double(const BlockIndex&, const Point&)>& value) {
    std::vector<Vector> w;
    const Mesh& mesh = cover.mesh();
    for (const auto& blk : layout->blocks()) {
        const auto& cells = cover.patch(blk.patch()).submesh.cells();
        Vector v(static_cast<Index>(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            v(static_cast<Index>(c)) = value(blk, mesh.barycenter(mesh.dim(), cells[c]));
        }
        w.push_back(std::move(v));
    }
    return WeightField(std::move(layout), std::move(w));
}

bool WeightField::strictly_positive() const {
    for (const auto& w : weights_) {
        if (w.size() > 0 && w.minCoeff() <= 0.0) {
            return false;
        }
    }
    return true;
}

WeightField WeightField::scaled(double factor) const {
    std::vector<Vector> w = weights_;
    for (auto& v : w) {
        v *= factor;
    }
    return WeightField(layout_, std::move(w));
}

WeightSet WeightSet::unit(const Complex& complex) {
    WeightSet set;
    for (int k = 0; k <= complex.max_degree(); ++k) {
        set.fields_.push_back(WeightField::uniform(complex.cover(), complex.layout(k), 1.0));
    }
    return set;
}

const WeightField& WeightSet::at(int k) const {
    if (k < 0 || k > max_degree()) {
        throw std::out_of_range("WeightSet: degree out of range");
    }
    return fields_[static_cast<std::size_t>(k)];
}

void WeightSet::set(int k, WeightField field) {
    if (k < 0 || k > max_degree()) {
        throw std::out_of_range("WeightSet: degree out of range");
    }
    if (field.degree() != k) {
        throw std::invalid_argument("WeightSet: field degree mismatch");
    }
    fields_[static_cast<std::size_t>(k)] = std::move(field);
}

// ---------------------------------------------------------------- operators

SparseMatrix BlockOperator::block(std::size_t out, std::size_t in) const {
    return SparseMatrix(matrix.block(codomain->offset(out), domain->offset(in), codomain->block_size(out),
                                     domain->block_size(in)));
}

Cochain BlockOperator::apply(const Cochain& x) const {
    if (x.size() != matrix.cols()) {
        throw std::invalid_argument("BlockOperator: cochain has the wrong degree");
    }
    return Cochain(codomain, matrix * x.values());
}

Codifferential::Codifferential(int degree, SparseMatrix lower_mass, SparseMatrix weighted_transpose, LayoutPtr domain,
                               LayoutPtr codomain)
    : degree_(degree),
      lower_mass_(std::move(lower_mass)),
      weighted_transpose_(std::move(weighted_transpose)),
      domain_(std::move(domain)),
      codomain_(std::move(codomain)) {
    if (lower_mass_.rows() > 0) {
        solver_ = std::make_shared<const linalg::SpdSolver>(lower_mass_);
    }
}

Vector Codifferential::apply(const Vector& x) const {
    if (x.size() != weighted_transpose_.cols()) {
        throw std::invalid_argument("Codifferential: argument has the wrong degree");
    }
    if (!solver_) {
        return Vector::Zero(0);
    }
    return solver_->solve(Vector(weighted_transpose_ * x));
}

Cochain Codifferential::apply(const Cochain& x) const { return Cochain(codomain_, apply(x.values())); }

DenseMatrix Codifferential::dense() const {
    if (!solver_) {
        return DenseMatrix::Zero(0, weighted_transpose_.cols());
    }
    return solver_->solve(dense_of(weighted_transpose_));
}

DenseMatrix CouplingTerms::sum() const {
    return sign_of(degree) * (d_star_delta - delta_d_star + delta_star_d - d_delta_star);
}

// ---------------------------------------------------------------- complex

Complex::Complex(CoverPtr cover) : cover_(std::move(cover)) {
    if (!cover_) {
        throw std::invalid_argument("Complex: null cover");
    }
    // Degrees -1 .. max_degree + 1 so that neighbours of every valid degree
    // exist (as empty spaces at the ends).
    for (int k = -1; k <= max_degree() + 1; ++k) {
        layouts_.push_back(std::make_shared<const BlockLayout>(*cover_, k));
    }
}

LayoutPtr Complex::layout(int k) const {
    if (k < -1 || k > max_degree() + 1) {
        return std::make_shared<const BlockLayout>(*cover_, k);
    }
    return layouts_[static_cast<std::size_t>(k + 1)];
}

BlockOperator Complex::exterior_derivative(int k) const {
    const LayoutPtr in = layout(k);
    const LayoutPtr out = layout(k + 1);
    std::vector<Triplet> trips;
    for (std::size_t b = 0; b < in->num_blocks(); ++b) {
        const BlockIndex& blk = in->block(b);
        if (blk.q >= dim()) {
            continue;
        }
        const auto target = out->find(blk.p, blk.position);
        const Mesh& local = cover_->patch(blk.patch()).submesh.local();
        add_block(trips, local.coboundary(blk.q), out->offset(*target), in->offset(b), 1.0);
    }
    return BlockOperator{in, out, from_triplets(out->size(), in->size(), trips)};
}

BlockOperator Complex::cech_differential(int k) const {
    const LayoutPtr in = layout(k);
    const LayoutPtr out = layout(k + 1);
    std::vector<Triplet> trips;
    for (std::size_t b = 0; b < out->num_blocks(); ++b) {
        const BlockIndex& blk = out->block(b);
        if (blk.p == 0) {
            continue;
        }
        const MultiIndex& idx = cover_->patch(blk.patch()).index;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            const PatchRef from = *cover_->find(idx.without(j));
            const auto source = in->find(from.level, from.position);
            const SparseMatrix& r = cover_->restriction(blk.q, from, blk.patch());
            add_block(trips, r, out->offset(b), in->offset(*source), (j % 2 == 0) ? 1.0 : -1.0);
        }
    }
    return BlockOperator{in, out, from_triplets(out->size(), in->size(), trips)};
}

BlockOperator Complex::total_derivative(int k) const {
    BlockOperator d = exterior_derivative(k);
    const BlockOperator delta = cech_differential(k);
    d.matrix = d.matrix + static_cast<double>(sign_of(k)) * delta.matrix;
    d.matrix.prune(0.0);
    d.matrix.makeCompressed();
    return d;
}

BlockOperator Complex::mass_matrix(int k, const WeightField& w, bool allow_degenerate) const {
    const LayoutPtr lay = layout(k);
    if (lay->size() > 0 && w.degree() != k) {
        throw std::invalid_argument("mass_matrix: weight field degree mismatch");
    }
    if (lay->size() > 0 && !allow_degenerate && !w.strictly_positive()) {
        throw std::invalid_argument("mass_matrix: weights must be strictly positive");
    }
    std::vector<Triplet> trips;
    for (std::size_t b = 0; b < lay->num_blocks(); ++b) {
        const BlockIndex& blk = lay->block(b);
        const Mesh& local = cover_->patch(blk.patch()).submesh.local();
        const Vector& cw = w.cell_weights(b);
        const Index off = lay->offset(b);
        for (Index c = 0; c < local.num_cells(); ++c) {
            if (cw(c) == 0.0) {
                continue;
            }
            const DenseMatrix m = cw(c) * forms::element_mass(local, blk.q, c);
            const auto dofs = forms::cell_dofs(local, blk.q, c);
            for (std::size_t i = 0; i < dofs.size(); ++i) {
                for (std::size_t j = 0; j < dofs.size(); ++j) {
                    trips.emplace_back(off + dofs[i], off + dofs[j], m(static_cast<Index>(i), static_cast<Index>(j)));
                }
            }
        }
    }
    SparseMatrix m = from_triplets(lay->size(), lay->size(), trips);
    // Symmetrize exactly: quadrature sums may differ in the last bit.
    SparseMatrix mt = m.transpose();
    m = 0.5 * (m + mt);
    m.makeCompressed();
    return BlockOperator{lay, lay, m};
}

SparseMatrix Complex::mass_factor(int k, const WeightField& w) const {
    const LayoutPtr lay = layout(k);
    std::vector<Triplet> trips;
    Index row = 0;
    for (std::size_t b = 0; b < lay->num_blocks(); ++b) {
        const BlockIndex& blk = lay->block(b);
        const Mesh& local = cover_->patch(blk.patch()).submesh.local();
        const Vector& cw = w.cell_weights(b);
        const Index off = lay->offset(b);
        for (Index c = 0; c < local.num_cells(); ++c) {
            if (cw(c) == 0.0) {
                continue;
            }
            const DenseMatrix lt = std::sqrt(cw(c)) * linalg::cholesky_lower(forms::element_mass(local, blk.q, c)).transpose();
            const auto dofs = forms::cell_dofs(local, blk.q, c);
            for (Index i = 0; i < lt.rows(); ++i) {
                for (std::size_t j = 0; j < dofs.size(); ++j) {
                    trips.emplace_back(row + i, off + dofs[j], lt(i, static_cast<Index>(j)));
                }
            }
            row += lt.rows();
        }
    }
    return from_triplets(row, lay->size(), trips);
}

Codifferential Complex::adjoint_of(const BlockOperator& op, int k, const WeightSet& weights) const {
    // op maps A^{k-1} -> A^k.
    const LayoutPtr lower = layout(k - 1);
    const LayoutPtr upper = layout(k);
    SparseMatrix lower_mass(lower->size(), lower->size());
    SparseMatrix upper_mass(upper->size(), upper->size());
    if (lower->size() > 0) {
        lower_mass = mass_matrix(k - 1, weights.at(k - 1)).matrix;
    }
    if (upper->size() > 0) {
        upper_mass = mass_matrix(k, weights.at(k), true).matrix;
    }
    SparseMatrix wt = SparseMatrix(op.matrix.transpose()) * upper_mass;
    wt.prune(0.0);
    return Codifferential(k, std::move(lower_mass), std::move(wt), upper, lower);
}

Codifferential Complex::codifferential(int k, const WeightSet& weights) const {
    return adjoint_of(total_derivative(k - 1), k, weights);
}

Codifferential Complex::d_adjoint(int k, const WeightSet& weights) const {
    return adjoint_of(exterior_derivative(k - 1), k, weights);
}

Codifferential Complex::delta_adjoint(int k, const WeightSet& weights) const {
    return adjoint_of(cech_differential(k - 1), k, weights);
}

CouplingTerms Complex::coupling_terms(int k, const WeightSet& weights) const {
    const DenseMatrix d_up = dense_of(exterior_derivative(k).matrix);
    const DenseMatrix d_down = dense_of(exterior_derivative(k - 1).matrix);
    const DenseMatrix delta_up = dense_of(cech_differential(k).matrix);
    const DenseMatrix delta_down = dense_of(cech_differential(k - 1).matrix);
    const DenseMatrix d_star_up = d_adjoint(k + 1, weights).dense();
    const DenseMatrix d_star_down = d_adjoint(k, weights).dense();
    const DenseMatrix delta_star_up = delta_adjoint(k + 1, weights).dense();
    const DenseMatrix delta_star_down = delta_adjoint(k, weights).dense();

    CouplingTerms t;
    t.degree = k;
    t.d_star_delta = d_star_up * delta_up;
    t.delta_d_star = delta_down * d_star_down;
    t.delta_star_d = delta_star_up * d_up;
    t.d_delta_star = d_down * delta_star_down;
    return t;
}

Laplacians Complex::laplacians(int k, const WeightSet& weights) const {
    const Index n = layout(k)->size();
    linalg::require_dense_budget(n, "laplacians");
    Laplacians lap;
    lap.total = dense_of(total_derivative(k - 1).matrix) * codifferential(k, weights).dense() +
                codifferential(k + 1, weights).dense() * dense_of(total_derivative(k).matrix);
    lap.d_part = dense_of(exterior_derivative(k - 1).matrix) * d_adjoint(k, weights).dense() +
                 d_adjoint(k + 1, weights).dense() * dense_of(exterior_derivative(k).matrix);
    lap.delta_part = dense_of(cech_differential(k - 1).matrix) * delta_adjoint(k, weights).dense() +
                     delta_adjoint(k + 1, weights).dense() * dense_of(cech_differential(k).matrix);
    return lap;
}

void write_matrix_market(std::ostream& out, const SparseMatrix& matrix) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
    out << std::setprecision(17);
    // Row-major order for readability.
    Eigen::SparseMatrix<double, Eigen::RowMajor, Index> rm = matrix;
    for (Index r = 0; r < rm.outerSize(); ++r) {
        for (decltype(rm)::InnerIterator it(rm, r); it; ++it) {
            out << (it.row() + 1) << ' ' << (it.col() + 1) << ' ' << it.value() << '\n';
        }
    }
}

}  // namespace cdr
