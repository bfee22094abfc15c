#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "cdr/linalg.hpp"

namespace cdr {

/// Point in the plane; 1D meshes use y = 0.
using Point = Eigen::Vector2d;

/// Vertex tuple of a q-simplex, q <= 2. Only the first q+1 entries are used
/// and they are strictly increasing.
using Simplex = std::array<Index, 3>;

class InvalidRangeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Simplicial mesh of dimension 1 or 2 with every sub-simplex enumerated.
///
/// Simplices are stored with increasing vertex indices; the i-th face of a
/// q-simplex is the (q-1)-simplex obtained by dropping vertex i, and enters
/// the coboundary with sign (-1)^i.
class Mesh {
public:
    /// Build from vertex coordinates and top-dimensional cells. Vertex tuples
    /// are sorted; lower-dimensional simplices are generated and deduplicated.
    Mesh(int dim, std::vector<Point> vertices, std::vector<Simplex> cells);

    int dim() const { return dim_; }
    const std::vector<Point>& vertices() const { return vertices_; }
    Index num_simplices(int q) const;
    Index num_cells() const { return num_simplices(dim_); }
    const Simplex& simplex(int q, Index i) const { return simplices_.at(static_cast<std::size_t>(q))[static_cast<std::size_t>(i)]; }
    const std::vector<Simplex>& simplices(int q) const { return simplices_.at(static_cast<std::size_t>(q)); }

    /// Index of the face of simplex (q, i) obtained by dropping local vertex j.
    Index face(int q, Index i, int j) const;

    /// Length / area of a q-simplex; vertices have unit measure.
    double measure(int q, Index i) const { return measures_.at(static_cast<std::size_t>(q))[static_cast<std::size_t>(i)]; }
    const std::vector<double>& measures(int q) const { return measures_.at(static_cast<std::size_t>(q)); }

    Point barycenter(int q, Index i) const;

    /// Signed incidence matrix d^q: (#(q+1)-simplices x #q-simplices).
    SparseMatrix coboundary(int q) const;

    /// Position of the simplex with the given (sorted) vertices, or -1.
    Index find(int q, const Simplex& vertices) const;

private:
    int dim_;
    std::vector<Point> vertices_;
    std::array<std::vector<Simplex>, 3> simplices_;
    std::array<std::vector<std::array<Index, 3>>, 3> faces_;
    std::array<std::vector<double>, 3> measures_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Uniform mesh of [a, b] with `cells` intervals.
MeshPtr build_interval_mesh(double a, double b, Index cells);

/// Structured mesh of the rectangle [x0,x1]x[y0,y1]: nx*ny quads, each split
/// along the diagonal from its lower-left to its upper-right corner.
MeshPtr build_triangle_mesh(double x0, double y0, double x1, double y1, Index nx, Index ny);

/// Structured rectangle mesh keeping only triangles whose barycenter passes
/// `keep`; unused vertices are dropped. Used for domains with holes.
MeshPtr build_triangle_mesh(double x0, double y0, double x1, double y1, Index nx, Index ny,
                            const std::function<bool(const Point&)>& keep);

/// Free-function form of Mesh::coboundary; throws std::out_of_range for
/// q outside [0, dim).
SparseMatrix coboundary_matrix(const Mesh& mesh, int q);

/// Closure of a set of top-dimensional cells, realized as a standalone mesh
/// with injective maps back into the parent numbering.
///
/// Local vertex numbering preserves the parent order, so local simplices keep
/// the orientation they have in the parent.
class SubMesh {
public:
    SubMesh(MeshPtr parent, std::vector<Index> cells);

    const Mesh& parent() const { return *parent_; }
    const MeshPtr& parent_ptr() const { return parent_; }
    const Mesh& local() const { return *local_; }
    const MeshPtr& local_ptr() const { return local_; }
    /// Parent cells, sorted.
    const std::vector<Index>& cells() const { return cells_; }
    /// dof_map(q)[local] = parent index; strictly increasing.
    const std::vector<Index>& dof_map(int q) const { return dof_map_.at(static_cast<std::size_t>(q)); }
    Index num_simplices(int q) const { return local_->num_simplices(q); }

    /// 0/1 selection matrix R_q (#local q-simplices x #parent q-simplices).
    SparseMatrix selection(int q) const;

private:
    MeshPtr parent_;
    MeshPtr local_;
    std::vector<Index> cells_;
    std::array<std::vector<Index>, 3> dof_map_;
};

/// Throws std::invalid_argument for an empty or out-of-range cell subset.
SubMesh extract_submesh(const MeshPtr& mesh, std::vector<Index> cells);

}  // namespace cdr
