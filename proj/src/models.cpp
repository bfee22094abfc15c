#include "cdr/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cdr/forms.hpp"

namespace cdr::models {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw ConfigError(message);
    }
}

void require_positive(double value, const std::string& name) {
    require(std::isfinite(value) && value > 0.0, name + " must be positive and finite");
}

// Unit-weight L2 projection of the block-wise fields, with a cell map from
// each block's local cells to the cell numbering the fields expect.
Vector project_blocks(const Complex& complex, const std::function<ScalarField(std::size_t)>& field_of,
                      const std::function<Index(std::size_t, Index)>& cell_of) {
    const LayoutPtr lay = complex.layout(0);
    Vector load = Vector::Zero(lay->size());
    for (std::size_t b = 0; b < lay->num_blocks(); ++b) {
        const Mesh& local = complex.cover().patch(lay->block(b).patch()).submesh.local();
        const ScalarField f = field_of(b);
        load.segment(lay->offset(b), lay->block_size(b)) = forms::assemble_load(
            local, 0, [&](const Point& x, Index c) { return Point(f(x, cell_of(b, c)), 0.0); });
    }
    const SparseMatrix mass =
        complex.mass_matrix(0, WeightField::uniform(complex.cover(), lay, 1.0)).matrix;
    return linalg::SpdSolver(mass).solve(load);
}

}  // namespace

HodgeProblem Model::problem() const {
    HodgeProblem p;
    p.complex = complex;
    p.degree = 0;
    p.weights = weights;
    p.source = source;
    p.allow_degenerate = allow_degenerate;
    return p;
}

bool in_set(const Cover& cover, int set, Index parent_cell) {
    const auto& cells = cover.set(set);
    return std::binary_search(cells.begin(), cells.end(), parent_cell);
}

Cochain project_scalars(const Complex& complex, const std::vector<ScalarField>& fields) {
    const LayoutPtr lay = complex.layout(0);
    if (fields.size() != lay->num_blocks()) {
        throw std::invalid_argument("project_scalars: one field per cover set required");
    }
    const Cover& cover = complex.cover();
    return Cochain(lay, project_blocks(
                            complex, [&](std::size_t b) { return fields[b]; },
                            [&](std::size_t b, Index c) {
                                return cover.patch(lay->block(b).patch()).submesh.cells()[static_cast<std::size_t>(c)];
                            }));
}

Model build_model(std::string name, CoverPtr cover, const std::vector<double>& set_weights,
                  const DenseMatrix& exchange, std::vector<ScalarField> forcing) {
    const int n = cover->num_sets();
    require(static_cast<int>(set_weights.size()) == n, "one weight per cover set required");
    require(exchange.rows() == n && exchange.cols() == n, "exchange matrix must be N x N");
    require(static_cast<int>(forcing.size()) == n, "one forcing per cover set required");
    for (int i = 0; i < n; ++i) {
        std::ostringstream nm;
        nm << "w_" << i;
        require_positive(set_weights[static_cast<std::size_t>(i)], nm.str());
        require(exchange(i, i) == 0.0, "exchange matrix must have a zero diagonal");
        for (int j = 0; j < n; ++j) {
            require(std::isfinite(exchange(i, j)) && exchange(i, j) >= 0.0, "exchange weights must be nonnegative");
            require(exchange(i, j) == exchange(j, i), "exchange matrix must be symmetric");
        }
    }

    Model model;
    model.name = std::move(name);
    model.complex = std::make_shared<const Complex>(std::move(cover));
    const Complex& cx = *model.complex;
    model.weights = WeightSet::unit(cx);
    bool degenerate = false;
    if (cx.max_degree() >= 1) {
        model.weights.set(1, WeightField::per_block(cx.cover(), cx.layout(1), [&](const BlockIndex& blk, const Patch& patch) {
            if (blk.p == 0) {
                return set_weights[static_cast<std::size_t>(patch.index[0])];
            }
            const double w = exchange(patch.index[0], patch.index[1]);
            degenerate = degenerate || w == 0.0;
            return w;
        }));
    }
    model.allow_degenerate = degenerate;
    model.forcing = std::move(forcing);
    model.source = project_scalars(cx, model.forcing);
    return model;
}

void set_forcing(Model& model, std::vector<ScalarField> forcing) {
    require(static_cast<int>(forcing.size()) == model.complex->cover().num_sets(), "one forcing per cover set required");
    model.forcing = std::move(forcing);
    model.source = project_scalars(*model.complex, model.forcing);
}

Model build_rods(const RodsConfig& config) {
    require(config.epsilon > 0.0 && config.epsilon < 1.0, "rods: epsilon must lie in (0, 1)");
    require(config.cells_per_unit >= 1, "rods: cells_per_unit must be at least 1");
    require_positive(config.w0, "rods: w0");
    require_positive(config.w1, "rods: w1");
    require(std::isfinite(config.w01) && config.w01 >= 0.0, "rods: w01 must be nonnegative");
    auto mesh = build_interval_mesh(-1.0, 1.0, 2 * config.cells_per_unit);
    const double eps = config.epsilon;
    auto u0 = select_cells(*mesh, [eps](const Point& p) { return p.x() < eps; });
    auto u1 = select_cells(*mesh, [eps](const Point& p) { return p.x() > -eps; });
    auto cover = build_cover(mesh, {u0, u1});
    require(cover->max_level() >= 1, "rods: the overlap contains no cells; refine the mesh or widen epsilon");
    DenseMatrix ex(2, 2);
    ex << 0.0, config.w01, config.w01, 0.0;
    return build_model("rods", cover, {config.w0, config.w1}, ex, {config.f0, config.f1});
}

Model build_multicontinuum(const MultiContinuumConfig& config) {
    const int n = config.continua;
    require(n >= 2, "multicontinuum: at least two continua required");
    require(config.resolution >= 1, "multicontinuum: resolution must be at least 1");
    auto mesh = build_triangle_mesh(0.0, 0.0, 1.0, 1.0, config.resolution, config.resolution);
    std::vector<Index> all(static_cast<std::size_t>(mesh->num_cells()));
    for (Index c = 0; c < mesh->num_cells(); ++c) {
        all[static_cast<std::size_t>(c)] = c;
    }
    auto cover = build_cover(mesh, std::vector<std::vector<Index>>(static_cast<std::size_t>(n), all));
    Model model = build_model("multicontinuum", cover, config.permeability, config.exchange, config.forcing);
    model.compressible = config.compressible;
    return model;
}

Model build_inclusion(const InclusionConfig& config) {
    require(config.x0 < config.x1 && config.y0 < config.y1, "inclusion: empty box");
    require(config.radius > 0.0, "inclusion: radius must be positive");
    require(config.center.x() - config.radius > config.x0 && config.center.x() + config.radius < config.x1 &&
                config.center.y() - config.radius > config.y0 && config.center.y() + config.radius < config.y1,
            "inclusion: the disk must lie strictly inside the box");
    require_positive(config.w0, "inclusion: w0");
    require_positive(config.w1, "inclusion: w1");
    require(std::isfinite(config.w01) && config.w01 >= 0.0, "inclusion: w01 must be nonnegative");
    auto mesh = build_triangle_mesh(config.x0, config.y0, config.x1, config.y1, config.resolution, config.resolution);
    std::vector<Index> all(static_cast<std::size_t>(mesh->num_cells()));
    for (Index c = 0; c < mesh->num_cells(); ++c) {
        all[static_cast<std::size_t>(c)] = c;
    }
    const Point center = config.center;
    const double r = config.radius;
    auto disk = select_cells(*mesh, [&](const Point& p) { return (p - center).norm() < r; });
    require(!disk.empty(), "inclusion too small: no cell center falls inside the disk");
    auto cover = build_cover(mesh, {all, disk});
    DenseMatrix ex(2, 2);
    ex << 0.0, config.w01, config.w01, 0.0;
    return build_model("inclusion", cover, {config.w0, config.w1}, ex, {config.f0, config.f1});
}

double l2_error(const Complex& complex, const HarmonicBasis& harmonic, const Cochain& alpha,
                const std::vector<ScalarField>& exact) {
    const LayoutPtr lay = complex.layout(0);
    if (exact.size() != lay->num_blocks() || alpha.size() != lay->size()) {
        throw std::invalid_argument("l2_error: one exact field per cover set required");
    }
    const Cover& cover = complex.cover();
    auto local_field = [&](std::size_t b) {
        const std::vector<Index>* cells = &cover.patch(lay->block(b).patch()).submesh.cells();
        const ScalarField* f = &exact[b];
        return [cells, f](const Point& x, Index c) {
            return Point((*f)(x, (*cells)[static_cast<std::size_t>(c)]), 0.0);
        };
    };
    // <H_j, exact> is exact for discrete H_j, so no projection solve is needed.
    Vector load = Vector::Zero(lay->size());
    for (std::size_t b = 0; b < lay->num_blocks(); ++b) {
        const Mesh& local = cover.patch(lay->block(b).patch()).submesh.local();
        load.segment(lay->offset(b), lay->block_size(b)) = forms::assemble_load(local, 0, local_field(b));
    }
    const Vector shift = harmonic.vectors * (harmonic.vectors.transpose() * load);
    const Vector diff = alpha.values() + shift;
    double total = 0.0;
    for (std::size_t b = 0; b < lay->num_blocks(); ++b) {
        const Mesh& local = cover.patch(lay->block(b).patch()).submesh.local();
        total += forms::l2_error_squared(local, 0, Vector(diff.segment(lay->offset(b), lay->block_size(b))),
                                         local_field(b));
    }
    return std::sqrt(total);
}

double ExchangeBalance::max_mismatch() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < exchange.size(); ++i) {
        worst = std::max(worst, std::abs(exchange[i] - source[i]));
    }
    return worst;
}

ExchangeBalance exchange_balance(const Model& model, const HodgeSolution& solution) {
    const Complex& cx = *model.complex;
    const DegreeOperators ops = assemble_operators(cx, 0, model.weights, model.allow_degenerate);
    const HarmonicBasis h = harmonic_basis(cx, 0, model.weights, model.allow_degenerate);
    const Vector& src = model.source.values();
    const Vector projected = src - h.vectors * (h.vectors.transpose() * (ops.mass * src));
    const Vector k_alpha = ops.stiffness * solution.alpha.values();
    const Vector m_phi = ops.mass * projected;
    ExchangeBalance out;
    for (std::size_t b = 0; b < ops.layout->num_blocks(); ++b) {
        out.exchange.push_back(k_alpha.segment(ops.layout->offset(b), ops.layout->block_size(b)).sum());
        out.source.push_back(m_phi.segment(ops.layout->offset(b), ops.layout->block_size(b)).sum());
    }
    return out;
}

Cochain single_domain_solve(const Model& model, int set) {
    const Complex& cx = *model.complex;
    const LayoutPtr lay = cx.layout(0);
    const auto b = lay->find(0, set);
    if (!b) {
        throw std::out_of_range("single_domain_solve: unknown set");
    }
    const SubMesh& sub = cx.cover().patch(PatchRef{0, static_cast<Index>(set)}).submesh;
    const MeshPtr mesh = sub.local_ptr();
    std::vector<Index> all(static_cast<std::size_t>(mesh->num_cells()));
    for (Index c = 0; c < mesh->num_cells(); ++c) {
        all[static_cast<std::size_t>(c)] = c;
    }
    auto single = std::make_shared<const Complex>(build_cover(mesh, {all}));
    WeightSet weights = WeightSet::unit(*single);
    const LayoutPtr lay1 = cx.layout(1);
    const auto grad_block = lay1->find(0, set);
    weights.set(1, WeightField(single->layout(1), {model.weights.at(1).cell_weights(*grad_block)}));

    const ScalarField f = model.forcing[static_cast<std::size_t>(set)];
    const auto& parent_cells = sub.cells();
    HodgeProblem p;
    p.complex = single;
    p.degree = 0;
    p.weights = weights;
    p.source = Cochain(single->layout(0),
                       project_blocks(
                           *single, [&](std::size_t) { return f; },
                           [&](std::size_t, Index c) { return parent_cells[static_cast<std::size_t>(c)]; }));
    return solve_primal_k0(p).alpha;
}

Index coupling_nonzeros(const Model& model, int i, int j) {
    const DegreeOperators ops = assemble_operators(*model.complex, 0, model.weights, model.allow_degenerate);
    const auto bi = ops.layout->find(0, i);
    const auto bj = ops.layout->find(0, j);
    if (!bi || !bj) {
        throw std::out_of_range("coupling_nonzeros: unknown set");
    }
    const SparseMatrix block(ops.stiffness.block(ops.layout->offset(*bi), ops.layout->offset(*bj),
                                                 ops.layout->block_size(*bi), ops.layout->block_size(*bj)));
    return linalg::structural_nonzeros(block);
}

std::vector<VertexValue> vertex_values(const Complex& complex, const Cochain& alpha) {
    const LayoutPtr lay = complex.layout(0);
    if (alpha.size() != lay->size()) {
        throw std::invalid_argument("vertex_values: expected a degree-0 cochain");
    }
    const Mesh& mesh = complex.cover().mesh();
    std::vector<VertexValue> out;
    for (std::size_t b = 0; b < lay->num_blocks(); ++b) {
        const Patch& patch = complex.cover().patch(lay->block(b).patch());
        const auto& vmap = patch.submesh.dof_map(0);
        for (std::size_t v = 0; v < vmap.size(); ++v) {
            out.push_back(VertexValue{patch.index[0], vmap[v], mesh.vertices()[static_cast<std::size_t>(vmap[v])],
                                      alpha.values()(lay->offset(b) + static_cast<Index>(v))});
        }
    }
    return out;
}

}  // namespace cdr::models
