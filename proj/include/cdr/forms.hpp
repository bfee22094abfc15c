#pragma once

// Lowest-order Whitney forms on 1D/2D simplicial meshes.
//
// Degrees of freedom of a q-form are its integrals over the q-simplices.
// Proxy fields: 0-forms and top forms are scalars, 1-forms in 2D are
// vectors. Scalars travel in the x component of the returned Vector2d.

#include <functional>
#include <vector>

#include "cdr/mesh.hpp"

namespace cdr::forms {

/// Quadrature point in barycentric coordinates (weights sum to 1).
struct QuadPoint {
    std::array<double, 3> bary;
    double weight;
};

/// Rule exact for polynomials of degree 5 on a simplex of dimension `dim`.
const std::vector<QuadPoint>& quadrature(int dim);

/// Number of q-form DOFs attached to one top cell.
int dofs_per_cell(int dim, int q);

/// Global q-simplex indices of the DOFs of `cell`, in local order.
/// q = 0: cell vertices; q = 1 in 2D: faces dropping vertex 0, 1, 2;
/// q = dim: the cell itself.
std::vector<Index> cell_dofs(const Mesh& mesh, int q, Index cell);

/// Physical point for barycentric coordinates on a top cell.
Point map_point(const Mesh& mesh, Index cell, const std::array<double, 3>& bary);

/// Proxy values of every local basis function of `cell` at a barycentric
/// point, one column per local DOF (2 rows: x/y or scalar in row 0).
Eigen::Matrix<double, 2, Eigen::Dynamic> basis_values(const Mesh& mesh, int q, Index cell,
                                                      const std::array<double, 3>& bary);

/// Unit-weight element mass matrix of q-forms on a top cell.
DenseMatrix element_mass(const Mesh& mesh, int q, Index cell);

/// Whether the proxy of a q-form in this dimension is vector valued.
inline bool is_vector_proxy(int dim, int q) { return dim == 2 && q == 1; }

/// Proxy field on a mesh: receives the point and the (local) cell index.
using ProxyField = std::function<Point(const Point&, Index)>;

/// Load vector b_i = sum_T int_T f . W_i over the mesh's cells.
Vector assemble_load(const Mesh& mesh, int q, const ProxyField& f);

/// Squared L2 distance between the Whitney interpolant of `coefficients` and
/// the exact proxy, accumulated cell by cell with the degree-5 rule.
double l2_error_squared(const Mesh& mesh, int q, const Vector& coefficients, const ProxyField& exact);

/// Proxy value of a discrete form at a barycentric point of a cell.
Point evaluate(const Mesh& mesh, int q, const Vector& coefficients, Index cell, const std::array<double, 3>& bary);

}  // namespace cdr::forms
