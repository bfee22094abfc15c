#include "cdr/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace cdr {

namespace {

Simplex sorted(Simplex s, int count) {
    std::sort(s.begin(), s.begin() + count);
    return s;
}

Simplex drop_vertex(const Simplex& s, int q, int j) {
    Simplex out{-1, -1, -1};
    int k = 0;
    for (int v = 0; v <= q; ++v) {
        if (v != j) {
            out[static_cast<std::size_t>(k++)] = s[static_cast<std::size_t>(v)];
        }
    }
    return out;
}

double simplex_measure(const std::vector<Point>& vertices, const Simplex& s, int q) {
    if (q == 0) {
        return 1.0;
    }
    const Point& a = vertices[static_cast<std::size_t>(s[0])];
    const Point& b = vertices[static_cast<std::size_t>(s[1])];
    if (q == 1) {
        return (b - a).norm();
    }
    const Point& c = vertices[static_cast<std::size_t>(s[2])];
    const Point u = b - a;
    const Point v = c - a;
    return 0.5 * std::abs(u.x() * v.y() - u.y() * v.x());
}

}  // namespace

Mesh::Mesh(int dim, std::vector<Point> vertices, std::vector<Simplex> cells)
    : dim_(dim), vertices_(std::move(vertices)) {
    if (dim != 1 && dim != 2) {
        throw std::invalid_argument("Mesh: dimension must be 1 or 2");
    }
    if (cells.empty()) {
        throw std::invalid_argument("Mesh: no cells");
    }
    const auto nverts = static_cast<Index>(vertices_.size());
    for (auto& cell : cells) {
        cell = sorted(cell, dim + 1);
        for (int v = 0; v <= dim; ++v) {
            const Index idx = cell[static_cast<std::size_t>(v)];
            if (idx < 0 || idx >= nverts) {
                throw std::invalid_argument("Mesh: cell references missing vertex");
            }
            if (v > 0 && cell[static_cast<std::size_t>(v - 1)] == idx) {
                throw std::invalid_argument("Mesh: degenerate cell");
            }
        }
    }
    for (Index v = 0; v < nverts; ++v) {
        simplices_[0].push_back({v, -1, -1});
    }
    simplices_[static_cast<std::size_t>(dim)] = std::move(cells);

    // Generate lower-dimensional simplices top-down, deduplicated and sorted
    // lexicographically for deterministic numbering.
    for (int q = dim; q >= 1; --q) {
        std::map<Simplex, Index> lookup;
        if (q - 1 > 0) {
            std::vector<Simplex> faces;
            for (const auto& s : simplices_[static_cast<std::size_t>(q)]) {
                for (int j = 0; j <= q; ++j) {
                    faces.push_back(drop_vertex(s, q, j));
                }
            }
            std::sort(faces.begin(), faces.end());
            faces.erase(std::unique(faces.begin(), faces.end()), faces.end());
            simplices_[static_cast<std::size_t>(q - 1)] = std::move(faces);
        }
        const auto& lower = simplices_[static_cast<std::size_t>(q - 1)];
        for (Index i = 0; i < static_cast<Index>(lower.size()); ++i) {
            lookup.emplace(lower[static_cast<std::size_t>(i)], i);
        }
        auto& face_table = faces_[static_cast<std::size_t>(q)];
        face_table.clear();
        for (const auto& s : simplices_[static_cast<std::size_t>(q)]) {
            std::array<Index, 3> f{-1, -1, -1};
            for (int j = 0; j <= q; ++j) {
                f[static_cast<std::size_t>(j)] = lookup.at(drop_vertex(s, q, j));
            }
            face_table.push_back(f);
        }
    }

    for (int q = 0; q <= dim; ++q) {
        auto& m = measures_[static_cast<std::size_t>(q)];
        for (const auto& s : simplices_[static_cast<std::size_t>(q)]) {
            const double mu = simplex_measure(vertices_, s, q);
            if (!(mu > 0.0)) {
                throw std::invalid_argument("Mesh: simplex with nonpositive measure");
            }
            m.push_back(mu);
        }
    }
}

Index Mesh::num_simplices(int q) const {
    if (q < 0 || q > dim_) {
        return 0;
    }
    return static_cast<Index>(simplices_[static_cast<std::size_t>(q)].size());
}

Index Mesh::face(int q, Index i, int j) const {
    return faces_.at(static_cast<std::size_t>(q))[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
}

Point Mesh::barycenter(int q, Index i) const {
    const Simplex& s = simplex(q, i);
    Point c = Point::Zero();
    for (int v = 0; v <= q; ++v) {
        c += vertices_[static_cast<std::size_t>(s[static_cast<std::size_t>(v)])];
    }
    return c / static_cast<double>(q + 1);
}

SparseMatrix Mesh::coboundary(int q) const {
    if (q < 0 || q >= dim_) {
        std::ostringstream msg;
        msg << "coboundary_matrix: degree " << q << " out of range [0, " << dim_ << ")";
        throw std::out_of_range(msg.str());
    }
    const Index rows = num_simplices(q + 1);
    const Index cols = num_simplices(q);
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(rows * (q + 2)));
    for (Index i = 0; i < rows; ++i) {
        for (int j = 0; j <= q + 1; ++j) {
            trips.emplace_back(i, face(q + 1, i, j), (j % 2 == 0) ? 1.0 : -1.0);
        }
    }
    SparseMatrix d(rows, cols);
    d.setFromTriplets(trips.begin(), trips.end());
    return d;
}

Index Mesh::find(int q, const Simplex& vertices) const {
    const auto& list = simplices_.at(static_cast<std::size_t>(q));
    if (q == 0) {
        return (vertices[0] >= 0 && vertices[0] < static_cast<Index>(list.size())) ? vertices[0] : -1;
    }
    auto key = vertices;
    for (int v = q + 1; v < 3; ++v) {
        key[static_cast<std::size_t>(v)] = -1;
    }
    if (q == dim_) {
        // Top cells keep construction order; linear scan.
        for (Index i = 0; i < static_cast<Index>(list.size()); ++i) {
            if (list[static_cast<std::size_t>(i)] == key) {
                return i;
            }
        }
        return -1;
    }
    const auto it = std::lower_bound(list.begin(), list.end(), key);
    if (it == list.end() || *it != key) {
        return -1;
    }
    return static_cast<Index>(it - list.begin());
}

SparseMatrix coboundary_matrix(const Mesh& mesh, int q) { return mesh.coboundary(q); }

MeshPtr build_interval_mesh(double a, double b, Index cells) {
    if (!(a < b)) {
        throw InvalidRangeError("build_interval_mesh: require a < b");
    }
    if (cells < 1) {
        throw InvalidRangeError("build_interval_mesh: require cells >= 1");
    }
    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>(cells + 1));
    const double h = (b - a) / static_cast<double>(cells);
    for (Index i = 0; i <= cells; ++i) {
        vertices.emplace_back(i == cells ? b : a + h * static_cast<double>(i), 0.0);
    }
    std::vector<Simplex> edges;
    for (Index i = 0; i < cells; ++i) {
        edges.push_back({i, i + 1, -1});
    }
    return std::make_shared<const Mesh>(1, std::move(vertices), std::move(edges));
}

MeshPtr build_triangle_mesh(double x0, double y0, double x1, double y1, Index nx, Index ny) {
    return build_triangle_mesh(x0, y0, x1, y1, nx, ny, [](const Point&) { return true; });
}

MeshPtr build_triangle_mesh(double x0, double y0, double x1, double y1, Index nx, Index ny,
                            const std::function<bool(const Point&)>& keep) {
    if (!(x0 < x1) || !(y0 < y1)) {
        throw InvalidRangeError("build_triangle_mesh: require x0 < x1 and y0 < y1");
    }
    if (nx < 1 || ny < 1) {
        throw InvalidRangeError("build_triangle_mesh: require nx, ny >= 1");
    }
    const double hx = (x1 - x0) / static_cast<double>(nx);
    const double hy = (y1 - y0) / static_cast<double>(ny);
    auto coord = [](double lo, double hi, double h, Index i, Index n) {
        return i == n ? hi : lo + h * static_cast<double>(i);
    };
    std::vector<Point> grid;
    for (Index j = 0; j <= ny; ++j) {
        for (Index i = 0; i <= nx; ++i) {
            grid.emplace_back(coord(x0, x1, hx, i, nx), coord(y0, y1, hy, j, ny));
        }
    }
    auto vid = [nx](Index i, Index j) { return j * (nx + 1) + i; };
    std::vector<Simplex> cells;
    for (Index j = 0; j < ny; ++j) {
        for (Index i = 0; i < nx; ++i) {
            const Index v00 = vid(i, j);
            const Index v10 = vid(i + 1, j);
            const Index v01 = vid(i, j + 1);
            const Index v11 = vid(i + 1, j + 1);
            for (const Simplex& t : {Simplex{v00, v10, v11}, Simplex{v00, v01, v11}}) {
                const Point c = (grid[static_cast<std::size_t>(t[0])] + grid[static_cast<std::size_t>(t[1])] +
                                 grid[static_cast<std::size_t>(t[2])]) /
                                3.0;
                if (keep(c)) {
                    cells.push_back(t);
                }
            }
        }
    }
    if (cells.empty()) {
        throw InvalidRangeError("build_triangle_mesh: predicate removed every cell");
    }
    // Compact vertex numbering, preserving order.
    std::vector<Index> remap(grid.size(), -1);
    for (const auto& t : cells) {
        for (int v = 0; v < 3; ++v) {
            remap[static_cast<std::size_t>(t[static_cast<std::size_t>(v)])] = 0;
        }
    }
    std::vector<Point> vertices;
    for (std::size_t v = 0; v < grid.size(); ++v) {
        if (remap[v] == 0) {
            remap[v] = static_cast<Index>(vertices.size());
            vertices.push_back(grid[v]);
        }
    }
    for (auto& t : cells) {
        for (int v = 0; v < 3; ++v) {
            t[static_cast<std::size_t>(v)] = remap[static_cast<std::size_t>(t[static_cast<std::size_t>(v)])];
        }
    }
    return std::make_shared<const Mesh>(2, std::move(vertices), std::move(cells));
}

SubMesh::SubMesh(MeshPtr parent, std::vector<Index> cells) : parent_(std::move(parent)), cells_(std::move(cells)) {
    if (!parent_) {
        throw std::invalid_argument("SubMesh: null parent mesh");
    }
    if (cells_.empty()) {
        throw std::invalid_argument("extract_submesh: empty cell subset");
    }
    std::sort(cells_.begin(), cells_.end());
    cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
    const int n = parent_->dim();
    if (cells_.front() < 0 || cells_.back() >= parent_->num_cells()) {
        throw std::invalid_argument("extract_submesh: cell index out of range");
    }

    // Closure: collect every face of every included cell, top-down.
    std::array<std::vector<Index>, 3> members;
    members[static_cast<std::size_t>(n)] = cells_;
    for (int q = n; q >= 1; --q) {
        auto& lower = members[static_cast<std::size_t>(q - 1)];
        for (const Index s : members[static_cast<std::size_t>(q)]) {
            for (int j = 0; j <= q; ++j) {
                lower.push_back(parent_->face(q, s, j));
            }
        }
        std::sort(lower.begin(), lower.end());
        lower.erase(std::unique(lower.begin(), lower.end()), lower.end());
    }
    for (int q = 0; q <= n; ++q) {
        dof_map_[static_cast<std::size_t>(q)] = members[static_cast<std::size_t>(q)];
    }

    // Local mesh: vertices in parent order (monotone relabelling keeps
    // sorted tuples sorted).
    const auto& vmap = dof_map_[0];
    std::vector<Point> local_vertices;
    local_vertices.reserve(vmap.size());
    for (const Index v : vmap) {
        local_vertices.push_back(parent_->vertices()[static_cast<std::size_t>(v)]);
    }
    auto local_vertex = [&](Index parent_vertex) {
        const auto it = std::lower_bound(vmap.begin(), vmap.end(), parent_vertex);
        return static_cast<Index>(it - vmap.begin());
    };
    std::vector<Simplex> local_cells;
    local_cells.reserve(cells_.size());
    for (const Index c : cells_) {
        Simplex s = parent_->simplex(n, c);
        for (int v = 0; v <= n; ++v) {
            s[static_cast<std::size_t>(v)] = local_vertex(s[static_cast<std::size_t>(v)]);
        }
        local_cells.push_back(s);
    }
    local_ = std::make_shared<const Mesh>(n, std::move(local_vertices), std::move(local_cells));

    // The local mesh enumerates intermediate simplices lexicographically in
    // local vertex labels, which is the parent order restricted to the
    // closure; verify the maps agree.
    for (int q = 1; q < n; ++q) {
        const auto& map = dof_map_[static_cast<std::size_t>(q)];
        if (static_cast<Index>(map.size()) != local_->num_simplices(q)) {
            throw std::logic_error("SubMesh: closure size mismatch");
        }
        for (Index i = 0; i < local_->num_simplices(q); ++i) {
            const Simplex& ls = local_->simplex(q, i);
            const Simplex& ps = parent_->simplex(q, map[static_cast<std::size_t>(i)]);
            for (int v = 0; v <= q; ++v) {
                if (vmap[static_cast<std::size_t>(ls[static_cast<std::size_t>(v)])] != ps[static_cast<std::size_t>(v)]) {
                    throw std::logic_error("SubMesh: local/parent simplex order mismatch");
                }
            }
        }
    }
}

SparseMatrix SubMesh::selection(int q) const {
    const auto& map = dof_map(q);
    SparseMatrix r(static_cast<Index>(map.size()), parent_->num_simplices(q));
    std::vector<Triplet> trips;
    trips.reserve(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) {
        trips.emplace_back(static_cast<Index>(i), map[i], 1.0);
    }
    r.setFromTriplets(trips.begin(), trips.end());
    return r;
}

SubMesh extract_submesh(const MeshPtr& mesh, std::vector<Index> cells) { return SubMesh(mesh, std::move(cells)); }

}  // namespace cdr
