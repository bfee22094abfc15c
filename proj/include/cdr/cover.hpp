#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "cdr/mesh.hpp"

namespace cdr {

/// Strictly increasing tuple (i_0, ..., i_p) of cover-set indices.
class MultiIndex {
public:
    MultiIndex() = default;
    /// Throws std::invalid_argument unless `indices` is nonempty and strictly increasing.
    explicit MultiIndex(std::vector<int> indices);

    int degree() const { return static_cast<int>(indices_.size()) - 1; }
    std::size_t size() const { return indices_.size(); }
    int operator[](std::size_t j) const { return indices_[j]; }
    const std::vector<int>& indices() const { return indices_; }

    /// The multi-index with the j-th entry removed.
    MultiIndex without(std::size_t j) const;

    std::string to_string() const;

    auto operator<=>(const MultiIndex&) const = default;

private:
    std::vector<int> indices_;
};

class NotACoverError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class UnknownIndexError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// One nonempty intersection U_i together with its closed sub-mesh.
struct Patch {
    MultiIndex index;
    SubMesh submesh;
};

/// Where a multi-index lives in the cover: level p and position within it.
struct PatchRef {
    int level = 0;
    Index position = 0;
    auto operator<=>(const PatchRef&) const = default;
};

/// Ordered finite cover of a mesh by unions of top-dimensional cells, with
/// every nonempty multiple intersection enumerated.
///
/// levels()[p] lists the (p+1)-fold intersections in lexicographic order of
/// their multi-indices. Overlap means shared cells; sets touching only along
/// a facet do not intersect.
class Cover {
public:
    /// Throws NotACoverError if the union misses a cell, std::invalid_argument
    /// for an empty set or out-of-range cell.
    Cover(MeshPtr mesh, std::vector<std::vector<Index>> sets);

    const Mesh& mesh() const { return *mesh_; }
    const MeshPtr& mesh_ptr() const { return mesh_; }
    int dim() const { return mesh_->dim(); }
    int num_sets() const { return static_cast<int>(sets_.size()); }
    const std::vector<Index>& set(int i) const { return sets_.at(static_cast<std::size_t>(i)); }

    /// Highest p with a nonempty (p+1)-fold intersection.
    int max_level() const { return static_cast<int>(levels_.size()) - 1; }
    const std::vector<Patch>& level(int p) const;
    const Patch& patch(const PatchRef& ref) const;

    /// Location of a multi-index, or nullopt if the intersection is empty.
    std::optional<PatchRef> find(const MultiIndex& index) const;

    /// Looks up an arbitrary tuple of distinct set indices, returning its
    /// patch and the sign of the sorting permutation (antisymmetric
    /// extension of the ordered convention).
    std::optional<std::pair<PatchRef, int>> find_oriented(const std::vector<int>& indices) const;

    /// 0/1 restriction of q-cochains from patch `from` (level p) onto patch
    /// `to` (level p+1, a sub-intersection of `from`).
    const SparseMatrix& restriction(int q, const PatchRef& from, const PatchRef& to) const;

    /// Highest total degree with a nonzero space: dim + max_level.
    int max_degree() const { return dim() + max_level(); }

private:
    MeshPtr mesh_;
    std::vector<std::vector<Index>> sets_;
    std::vector<std::vector<Patch>> levels_;
    std::map<MultiIndex, PatchRef> lookup_;
    std::map<std::tuple<int, PatchRef, PatchRef>, SparseMatrix> restrictions_;
};

using CoverPtr = std::shared_ptr<const Cover>;

CoverPtr build_cover(MeshPtr mesh, std::vector<std::vector<Index>> sets);

/// Sorted intersection of the constituent cell sets. Throws
/// UnknownIndexError if an entry is not a set of the cover; an empty result
/// is valid.
std::vector<Index> intersection_cells(const Cover& cover, const MultiIndex& index);

/// Cells whose barycenter satisfies the predicate.
std::vector<Index> select_cells(const Mesh& mesh, const std::function<bool(const Point&)>& predicate);

}  // namespace cdr
