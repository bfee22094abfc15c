#include "cdr/hodge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace cdr {

namespace {

void add_sparse(std::vector<Triplet>& trips, const SparseMatrix& m, Index row0, Index col0, bool transpose = false) {
    for (Index c = 0; c < m.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
            if (transpose) {
                trips.emplace_back(row0 + it.col(), col0 + it.row(), it.value());
            } else {
                trips.emplace_back(row0 + it.row(), col0 + it.col(), it.value());
            }
        }
    }
}

void add_dense(std::vector<Triplet>& trips, const DenseMatrix& m, Index row0, Index col0, bool transpose = false) {
    for (Index c = 0; c < m.cols(); ++c) {
        for (Index r = 0; r < m.rows(); ++r) {
            if (m(r, c) != 0.0) {
                if (transpose) {
                    trips.emplace_back(row0 + c, col0 + r, m(r, c));
                } else {
                    trips.emplace_back(row0 + r, col0 + c, m(r, c));
                }
            }
        }
    }
}

double relative(double num, double den) { return den > 0.0 ? num / den : num; }

// Projects the harmonic part off the source and fills the diagnostics.
Vector project_source(const HarmonicBasis& h, const SparseMatrix& mass, const Vector& phi, HodgeSolution& out) {
    out.kernel_dim = h.dimension();
    out.harmonic_coefficients = h.vectors.transpose() * (mass * phi);
    out.harmonic_norm = out.harmonic_coefficients.norm();
    const double phi_norm = norm(mass, phi);
    if (out.harmonic_norm > kSourceHarmonicTolerance * std::max(phi_norm, 1e-300) && out.harmonic_norm > 0.0) {
        out.source_projected = true;
        std::ostringstream msg;
        msg << "source has a harmonic component of weighted norm " << out.harmonic_norm
            << "; it was projected off before solving";
        out.warnings.push_back(msg.str());
    }
    return phi - h.vectors * out.harmonic_coefficients;
}

// Degree 0 has no lower space, so the harmonic space is ker(G D^0). Every
// row of D^0 is a difference x_a - x_b (an edge of one block or a Cech
// difference at a shared vertex), so the kernel is spanned by indicators of
// the connected components of the graph formed by rows that carry mass.
// Returns false when some row is not of that form.
bool zero_form_kernel(const SparseMatrix& d, const Vector& upper_mass_diag, DenseMatrix& out) {
    const Index n = d.cols();
    std::vector<Index> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&parent](Index x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    const Eigen::SparseMatrix<double, Eigen::RowMajor, Index> rows = d;
    for (Index r = 0; r < rows.outerSize(); ++r) {
        Index ends[2] = {-1, -1};
        double vals[2] = {0.0, 0.0};
        int count = 0;
        for (decltype(rows)::InnerIterator it(rows, r); it; ++it) {
            if (it.value() == 0.0) {
                continue;
            }
            if (count == 2) {
                return false;
            }
            ends[count] = it.col();
            vals[count] = it.value();
            ++count;
        }
        if (count == 0) {
            continue;
        }
        if (count != 2 || vals[0] + vals[1] != 0.0 || std::abs(vals[0]) != 1.0) {
            return false;
        }
        if (upper_mass_diag(r) > 0.0) {
            parent[static_cast<std::size_t>(find(ends[0]))] = find(ends[1]);
        }
    }
    std::vector<Index> label(static_cast<std::size_t>(n), -1);
    Index components = 0;
    for (Index i = 0; i < n; ++i) {
        Index& l = label[static_cast<std::size_t>(find(i))];
        if (l < 0) {
            l = components++;
        }
    }
    out = DenseMatrix::Zero(n, components);
    for (Index i = 0; i < n; ++i) {
        out(i, label[static_cast<std::size_t>(find(i))]) = 1.0;
    }
    return true;
}

}  // namespace

double inner(const SparseMatrix& mass, const Vector& x, const Vector& y) { return x.dot(mass * y); }

double norm(const SparseMatrix& mass, const Vector& x) { return std::sqrt(std::max(0.0, inner(mass, x, x))); }

DegreeOperators assemble_operators(const Complex& complex, int k, const WeightSet& weights, bool allow_degenerate) {
    if (k < 0 || k > complex.max_degree()) {
        throw std::out_of_range("assemble_operators: degree out of range");
    }
    DegreeOperators ops;
    ops.degree = k;
    ops.lower = complex.layout(k - 1);
    ops.layout = complex.layout(k);
    ops.upper = complex.layout(k + 1);
    ops.mass_lower = SparseMatrix(ops.lower->size(), ops.lower->size());
    ops.mass_upper = SparseMatrix(ops.upper->size(), ops.upper->size());
    if (ops.lower->size() > 0) {
        ops.mass_lower = complex.mass_matrix(k - 1, weights.at(k - 1)).matrix;
    }
    ops.mass = complex.mass_matrix(k, weights.at(k)).matrix;
    if (ops.upper->size() > 0) {
        ops.mass_upper = complex.mass_matrix(k + 1, weights.at(k + 1), allow_degenerate).matrix;
    }
    ops.d_lower = complex.total_derivative(k - 1).matrix;
    ops.d = complex.total_derivative(k).matrix;
    ops.stiffness = SparseMatrix(ops.d.transpose()) * ops.mass_upper * ops.d;
    ops.stiffness.prune(0.0);
    ops.coupling = ops.mass * ops.d_lower;
    return ops;
}

HarmonicBasis harmonic_basis(const Complex& complex, int k, const WeightSet& weights, bool allow_degenerate,
                             double rel_tol) {
    if (k < 0 || k > complex.max_degree()) {
        throw std::out_of_range("harmonic_basis: degree out of range");
    }
    const LayoutPtr lay = complex.layout(k);
    const Index n = lay->size();

    if (k == 0) {
        const WeightField& w = weights.at(1 <= complex.max_degree() ? 1 : 0);
        if (complex.max_degree() >= 1 && !allow_degenerate && !w.strictly_positive()) {
            throw std::invalid_argument("harmonic_basis: weights must be strictly positive");
        }
        const Vector diag = complex.max_degree() >= 1
                                ? Vector(complex.mass_matrix(1, w, true).matrix.diagonal())
                                : Vector::Zero(0);
        DenseMatrix indicators;
        if (zero_form_kernel(complex.total_derivative(0).matrix, diag, indicators)) {
            // M-orthonormalize the (few) indicator columns.
            const SparseMatrix mass = complex.mass_matrix(0, weights.at(0)).matrix;
            const DenseMatrix gram = indicators.transpose() * (mass * indicators);
            const DenseMatrix l = linalg::cholesky_lower(gram);
            HarmonicBasis basis;
            basis.degree = 0;
            basis.layout = lay;
            basis.vectors = linalg::solve_lower(l, indicators.transpose()).transpose();
            return basis;
        }
    }
    linalg::require_dense_budget(n, "harmonic_basis");
    const Index n_lower = complex.layout(k - 1)->size();
    const Index n_upper = complex.layout(k + 1)->size();

    const DenseMatrix mass = DenseMatrix(complex.mass_matrix(k, weights.at(k)).matrix);
    const DenseMatrix l = linalg::cholesky_lower(mass);
    const DenseMatrix l_inv_t = linalg::solve_lower_transpose(l, DenseMatrix::Identity(n, n));

    std::vector<DenseMatrix> parts;
    if (n_upper > 0) {
        const WeightField& w = weights.at(k + 1);
        if (!allow_degenerate && !w.strictly_positive()) {
            throw std::invalid_argument("harmonic_basis: weights must be strictly positive");
        }
        const SparseMatrix g = complex.mass_factor(k + 1, w);
        const SparseMatrix gd = g * complex.total_derivative(k).matrix;
        parts.push_back(DenseMatrix(gd) * l_inv_t);
    }
    if (n_lower > 0) {
        const DenseMatrix l_lower =
            linalg::cholesky_lower(DenseMatrix(complex.mass_matrix(k - 1, weights.at(k - 1)).matrix));
        const SparseMatrix dt_m =
            SparseMatrix(complex.total_derivative(k - 1).matrix.transpose()) * complex.mass_matrix(k, weights.at(k)).matrix;
        parts.push_back(linalg::solve_lower(l_lower, DenseMatrix(dt_m)) * l_inv_t);
    }
    Index rows = 0;
    for (const auto& p : parts) {
        rows += p.rows();
    }
    DenseMatrix stacked(rows, n);
    Index r = 0;
    for (const auto& p : parts) {
        stacked.middleRows(r, p.rows()) = p;
        r += p.rows();
    }
    HarmonicBasis basis;
    basis.degree = k;
    basis.layout = lay;
    basis.vectors = l_inv_t * linalg::nullspace_matrix(stacked, rel_tol);
    return basis;
}

std::vector<Index> cohomology_dims(const Complex& complex) {
    std::vector<Index> ranks;
    for (int k = -1; k <= complex.max_degree(); ++k) {
        const SparseMatrix d = complex.total_derivative(k).matrix;
        linalg::require_dense_budget(std::max(d.rows(), d.cols()), "cohomology_dims");
        ranks.push_back(linalg::integer_rank(DenseMatrix(d)));
    }
    std::vector<Index> dims;
    for (int k = 0; k <= complex.max_degree(); ++k) {
        const Index n = complex.layout(k)->size();
        dims.push_back(n - ranks[static_cast<std::size_t>(k + 1)] - ranks[static_cast<std::size_t>(k)]);
    }
    return dims;
}

HodgeSolution solve_primal_k0(const HodgeProblem& problem) {
    if (problem.degree != 0) {
        throw std::invalid_argument("solve_primal_k0: degree must be 0");
    }
    return solve_mixed(problem);
}

HodgeSolution solve_mixed(const HodgeProblem& problem) {
    if (!problem.complex) {
        throw std::invalid_argument("solve_mixed: no complex");
    }
    const Complex& complex = *problem.complex;
    const int k = problem.degree;
    const DegreeOperators ops = assemble_operators(complex, k, problem.weights, problem.allow_degenerate);
    if (problem.source.size() != ops.layout->size()) {
        throw std::invalid_argument("solve_mixed: source has the wrong degree");
    }
    const HarmonicBasis h = harmonic_basis(complex, k, problem.weights, problem.allow_degenerate);

    HodgeSolution out;
    const Vector phi = project_source(h, ops.mass, problem.source.values(), out);

    const Index m = ops.lower->size();
    const Index n = ops.layout->size();
    const Index nh = h.dimension();
    const DenseMatrix mh = ops.mass * h.vectors;

    // Unknown order (gamma, alpha, multiplier); the first row is negated so
    // the system stays symmetric.
    std::vector<Triplet> trips;
    if (m > 0) {
        SparseMatrix neg = -ops.mass_lower;
        add_sparse(trips, neg, 0, 0);
        add_sparse(trips, ops.coupling, 0, m, true);
        add_sparse(trips, ops.coupling, m, 0);
    }
    add_sparse(trips, ops.stiffness, m, m);
    add_dense(trips, mh, m, m + n);
    add_dense(trips, mh, m + n, m, true);
    SparseMatrix system(m + n + nh, m + n + nh);
    system.setFromTriplets(trips.begin(), trips.end());
    system.makeCompressed();

    Vector rhs = Vector::Zero(m + n + nh);
    const Vector mphi = ops.mass * phi;
    rhs.segment(m, n) = mphi;

    Vector sol = Vector::Zero(m + n + nh);
    if (rhs.norm() > 0.0) {
        linalg::SymmetricSolver solver(system);
        sol = solver.solve(rhs);
    } else {
        // Zero source: check the system is still nonsingular, the solution is 0.
        linalg::SymmetricSolver solver(system);
    }
    out.system_residual = relative((system * sol - rhs).norm(), rhs.norm());

    const Vector gamma = sol.head(m);
    const Vector alpha = sol.segment(m, n);
    out.alpha = Cochain(ops.layout, alpha);
    out.beta = Cochain(ops.upper, ops.d * alpha);
    out.gamma = Cochain(ops.lower, gamma);
    const Vector lap = ops.stiffness * alpha + ops.coupling * gamma;
    out.laplacian_residual = relative((lap - mphi).norm(), mphi.norm());
    out.harmonic_orthogonality = nh > 0 ? (mh.transpose() * alpha).cwiseAbs().maxCoeff() : 0.0;
    return out;
}

HodgeDecomposer::HodgeDecomposer(const Complex& complex, int k, const WeightSet& weights)
    : degree_(k), lower_(complex.layout(k - 1)), layout_(complex.layout(k)) {
    const Index n = layout_->size();
    linalg::require_dense_budget(n, "hodge_decompose");
    mass_ = complex.mass_matrix(k, weights.at(k)).matrix;
    const DenseMatrix l = linalg::cholesky_lower(DenseMatrix(mass_));
    chol_t_ = l.transpose();
    d_lower_ = complex.total_derivative(k - 1).matrix;
    whitened_pinv_ = linalg::pseudo_inverse(chol_t_ * DenseMatrix(d_lower_));
    harmonic_ = harmonic_basis(complex, k, weights);
}

HodgeDecomposition HodgeDecomposer::decompose(const Cochain& omega) const {
    if (omega.size() != layout_->size()) {
        throw std::invalid_argument("hodge_decompose: cochain has the wrong degree");
    }
    const Vector& w = omega.values();
    const Vector eta = whitened_pinv_ * (chol_t_ * w);
    const Vector exact = d_lower_ * eta;
    const Vector harmonic = harmonic_.vectors * (harmonic_.vectors.transpose() * (mass_ * w));
    HodgeDecomposition out;
    out.potential = Cochain(lower_, eta);
    out.exact = Cochain(layout_, exact);
    out.harmonic = Cochain(layout_, harmonic);
    out.coexact = Cochain(layout_, w - exact - harmonic);
    return out;
}

HodgeDecomposition hodge_decompose(const Complex& complex, int k, const WeightSet& weights, const Cochain& omega) {
    return HodgeDecomposer(complex, k, weights).decompose(omega);
}

double poincare_constant(const Complex& complex, int k, const WeightSet& weights) {
    if (k < 0 || k > complex.max_degree()) {
        throw std::out_of_range("poincare_constant: degree out of range");
    }
    const Index n = complex.layout(k)->size();
    linalg::require_dense_budget(n, "poincare_constant");
    if (complex.layout(k + 1)->size() == 0) {
        throw std::domain_error("poincare_constant: D vanishes in the top degree");
    }
    const DenseMatrix l = linalg::cholesky_lower(DenseMatrix(complex.mass_matrix(k, weights.at(k)).matrix));
    const DenseMatrix l_inv_t = linalg::solve_lower_transpose(l, DenseMatrix::Identity(n, n));
    const SparseMatrix g = complex.mass_factor(k + 1, weights.at(k + 1));
    const DenseMatrix a = DenseMatrix(SparseMatrix(g * complex.total_derivative(k).matrix)) * l_inv_t;
    const Vector sigma = linalg::singular_values(a);
    if (sigma.size() == 0 || sigma(0) == 0.0) {
        throw std::domain_error("poincare_constant: D vanishes identically");
    }
    const double cutoff = kHarmonicTolerance * sigma(0);
    double smallest = sigma(0);
    for (Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > cutoff) {
            smallest = sigma(i);
        }
    }
    return 1.0 / smallest;
}

}  // namespace cdr
