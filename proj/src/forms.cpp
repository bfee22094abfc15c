#include "cdr/forms.hpp"

#include <cmath>
#include <stdexcept>

namespace cdr::forms {

namespace {

std::vector<QuadPoint> make_gauss_1d() {
    const double r = std::sqrt(3.0 / 5.0) / 2.0;
    std::vector<QuadPoint> q;
    for (const auto& [t, w] : {std::pair{0.5 - r, 5.0 / 18.0}, std::pair{0.5, 8.0 / 18.0}, std::pair{0.5 + r, 5.0 / 18.0}}) {
        q.push_back(QuadPoint{{1.0 - t, t, 0.0}, w});
    }
    return q;
}

// Seven-point degree-5 rule on the triangle.
std::vector<QuadPoint> make_radon_2d() {
    const double s15 = std::sqrt(15.0);
    const double a1 = (6.0 - s15) / 21.0;
    const double a2 = (6.0 + s15) / 21.0;
    const double w1 = (155.0 - s15) / 1200.0;
    const double w2 = (155.0 + s15) / 1200.0;
    std::vector<QuadPoint> q;
    q.push_back(QuadPoint{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 9.0 / 40.0});
    for (const auto& [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}}) {
        const double b = 1.0 - 2.0 * a;
        q.push_back(QuadPoint{{b, a, a}, w});
        q.push_back(QuadPoint{{a, b, a}, w});
        q.push_back(QuadPoint{{a, a, b}, w});
    }
    return q;
}

struct TriangleGeometry {
    std::array<Point, 3> grad;  // barycentric gradients
};

TriangleGeometry triangle_geometry(const Mesh& mesh, Index cell) {
    const Simplex& s = mesh.simplex(2, cell);
    const Point& p0 = mesh.vertices()[static_cast<std::size_t>(s[0])];
    const Point& p1 = mesh.vertices()[static_cast<std::size_t>(s[1])];
    const Point& p2 = mesh.vertices()[static_cast<std::size_t>(s[2])];
    Eigen::Matrix2d jac;
    jac.col(0) = p1 - p0;
    jac.col(1) = p2 - p0;
    const Eigen::Matrix2d inv = jac.inverse();
    TriangleGeometry g;
    g.grad[1] = inv.row(0).transpose();
    g.grad[2] = inv.row(1).transpose();
    g.grad[0] = -(g.grad[1] + g.grad[2]);
    return g;
}

void check_degree(const Mesh& mesh, int q) {
    if (q < 0 || q > mesh.dim()) {
        throw std::out_of_range("forms: form degree out of range");
    }
}

}  // namespace

const std::vector<QuadPoint>& quadrature(int dim) {
    static const std::vector<QuadPoint> gauss = make_gauss_1d();
    static const std::vector<QuadPoint> radon = make_radon_2d();
    return dim == 1 ? gauss : radon;
}

int dofs_per_cell(int dim, int q) {
    if (q == 0) {
        return dim + 1;
    }
    if (q == dim) {
        return 1;
    }
    return 3;  // edges of a triangle
}

std::vector<Index> cell_dofs(const Mesh& mesh, int q, Index cell) {
    check_degree(mesh, q);
    const int n = mesh.dim();
    const Simplex& s = mesh.simplex(n, cell);
    if (q == 0) {
        return std::vector<Index>(s.begin(), s.begin() + n + 1);
    }
    if (q == n) {
        return {cell};
    }
    return {mesh.face(2, cell, 0), mesh.face(2, cell, 1), mesh.face(2, cell, 2)};
}

Point map_point(const Mesh& mesh, Index cell, const std::array<double, 3>& bary) {
    const int n = mesh.dim();
    const Simplex& s = mesh.simplex(n, cell);
    Point x = Point::Zero();
    for (int v = 0; v <= n; ++v) {
        x += bary[static_cast<std::size_t>(v)] * mesh.vertices()[static_cast<std::size_t>(s[static_cast<std::size_t>(v)])];
    }
    return x;
}

Eigen::Matrix<double, 2, Eigen::Dynamic> basis_values(const Mesh& mesh, int q, Index cell,
                                                      const std::array<double, 3>& bary) {
    check_degree(mesh, q);
    const int n = mesh.dim();
    Eigen::Matrix<double, 2, Eigen::Dynamic> out(2, dofs_per_cell(n, q));
    out.setZero();
    if (q == 0) {
        for (int v = 0; v <= n; ++v) {
            out(0, v) = bary[static_cast<std::size_t>(v)];
        }
        return out;
    }
    if (q == n) {
        out(0, 0) = 1.0 / mesh.measure(n, cell);
        return out;
    }
    // Whitney edge functions W = l_a grad l_b - l_b grad l_a for the edge
    // (a, b) left after dropping vertex j.
    const TriangleGeometry g = triangle_geometry(mesh, cell);
    static constexpr std::array<std::array<int, 2>, 3> kEdge{{{1, 2}, {0, 2}, {0, 1}}};
    for (int j = 0; j < 3; ++j) {
        const int a = kEdge[static_cast<std::size_t>(j)][0];
        const int b = kEdge[static_cast<std::size_t>(j)][1];
        out.col(j) = bary[static_cast<std::size_t>(a)] * g.grad[static_cast<std::size_t>(b)] -
                     bary[static_cast<std::size_t>(b)] * g.grad[static_cast<std::size_t>(a)];
    }
    return out;
}

DenseMatrix element_mass(const Mesh& mesh, int q, Index cell) {
    const int n = mesh.dim();
    const int m = dofs_per_cell(n, q);
    DenseMatrix mass = DenseMatrix::Zero(m, m);
    const double vol = mesh.measure(n, cell);
    for (const auto& qp : quadrature(n)) {
        const auto phi = basis_values(mesh, q, cell, qp.bary);
        mass.noalias() += (qp.weight * vol) * (phi.transpose() * phi);
    }
    return mass;
}

Vector assemble_load(const Mesh& mesh, int q, const ProxyField& f) {
    check_degree(mesh, q);
    const int n = mesh.dim();
    Vector load = Vector::Zero(mesh.num_simplices(q));
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        const auto dofs = cell_dofs(mesh, q, c);
        const double vol = mesh.measure(n, c);
        for (const auto& qp : quadrature(n)) {
            const Point x = map_point(mesh, c, qp.bary);
            const Point fx = f(x, c);
            const auto phi = basis_values(mesh, q, c, qp.bary);
            for (std::size_t i = 0; i < dofs.size(); ++i) {
                load(dofs[i]) += qp.weight * vol * phi.col(static_cast<Index>(i)).dot(fx);
            }
        }
    }
    return load;
}

Point evaluate(const Mesh& mesh, int q, const Vector& coefficients, Index cell, const std::array<double, 3>& bary) {
    const auto dofs = cell_dofs(mesh, q, cell);
    const auto phi = basis_values(mesh, q, cell, bary);
    Point value = Point::Zero();
    for (std::size_t i = 0; i < dofs.size(); ++i) {
        value += coefficients(dofs[i]) * phi.col(static_cast<Index>(i));
    }
    return value;
}

double l2_error_squared(const Mesh& mesh, int q, const Vector& coefficients, const ProxyField& exact) {
    if (coefficients.size() != mesh.num_simplices(q)) {
        throw std::invalid_argument("l2_error_squared: coefficient length mismatch");
    }
    const int n = mesh.dim();
    double total = 0.0;
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        const double vol = mesh.measure(n, c);
        for (const auto& qp : quadrature(n)) {
            const Point x = map_point(mesh, c, qp.bary);
            const Point diff = evaluate(mesh, q, coefficients, c, qp.bary) - exact(x, c);
            total += qp.weight * vol * diff.squaredNorm();
        }
    }
    return total;
}

}  // namespace cdr::forms
