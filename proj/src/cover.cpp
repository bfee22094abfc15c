#include "cdr/cover.hpp"

#include <algorithm>
#include <iterator>
#include <sstream>

namespace cdr {

MultiIndex::MultiIndex(std::vector<int> indices) : indices_(std::move(indices)) {
    if (indices_.empty()) {
        throw std::invalid_argument("MultiIndex: empty");
    }
    for (std::size_t j = 1; j < indices_.size(); ++j) {
        if (indices_[j] <= indices_[j - 1]) {
            throw std::invalid_argument("MultiIndex: entries must be strictly increasing");
        }
    }
}

MultiIndex MultiIndex::without(std::size_t j) const {
    std::vector<int> out;
    out.reserve(indices_.size() - 1);
    for (std::size_t k = 0; k < indices_.size(); ++k) {
        if (k != j) {
            out.push_back(indices_[k]);
        }
    }
    return MultiIndex(std::move(out));
}

std::string MultiIndex::to_string() const {
    std::ostringstream out;
    for (std::size_t j = 0; j < indices_.size(); ++j) {
        out << (j ? "," : "") << indices_[j];
    }
    return out.str();
}

namespace {

std::vector<Index> intersect(const std::vector<Index>& a, const std::vector<Index>& b) {
    std::vector<Index> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

SparseMatrix build_restriction(const SubMesh& from, const SubMesh& to, int q) {
    const auto& src = from.dof_map(q);
    const auto& dst = to.dof_map(q);
    SparseMatrix r(static_cast<Index>(dst.size()), static_cast<Index>(src.size()));
    std::vector<Triplet> trips;
    trips.reserve(dst.size());
    for (std::size_t row = 0; row < dst.size(); ++row) {
        const auto it = std::lower_bound(src.begin(), src.end(), dst[row]);
        if (it == src.end() || *it != dst[row]) {
            throw std::logic_error("Cover: intersection simplex missing from parent patch");
        }
        trips.emplace_back(static_cast<Index>(row), static_cast<Index>(it - src.begin()), 1.0);
    }
    r.setFromTriplets(trips.begin(), trips.end());
    return r;
}

}  // namespace

Cover::Cover(MeshPtr mesh, std::vector<std::vector<Index>> sets) : mesh_(std::move(mesh)), sets_(std::move(sets)) {
    if (!mesh_) {
        throw std::invalid_argument("build_cover: null mesh");
    }
    if (sets_.empty()) {
        throw std::invalid_argument("build_cover: no sets given");
    }
    const Index ncells = mesh_->num_cells();
    std::vector<char> covered(static_cast<std::size_t>(ncells), 0);
    for (std::size_t i = 0; i < sets_.size(); ++i) {
        auto& s = sets_[i];
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        if (s.empty()) {
            std::ostringstream msg;
            msg << "build_cover: set " << i << " is empty";
            throw std::invalid_argument(msg.str());
        }
        if (s.front() < 0 || s.back() >= ncells) {
            throw std::invalid_argument("build_cover: cell index out of range");
        }
        for (const Index c : s) {
            covered[static_cast<std::size_t>(c)] = 1;
        }
    }
    const auto missing = std::count(covered.begin(), covered.end(), 0);
    if (missing > 0) {
        std::ostringstream msg;
        msg << "build_cover: sets do not cover the mesh (" << missing << " cells uncovered)";
        throw NotACoverError(msg.str());
    }

    // Level 0: the sets themselves. Level p+1: extend each level-p index by a
    // larger set index while the intersection stays nonempty.
    std::vector<std::vector<std::pair<MultiIndex, std::vector<Index>>>> raw(1);
    for (int i = 0; i < num_sets(); ++i) {
        raw[0].emplace_back(MultiIndex({i}), sets_[static_cast<std::size_t>(i)]);
    }
    while (true) {
        std::vector<std::pair<MultiIndex, std::vector<Index>>> next;
        for (const auto& [idx, cells] : raw.back()) {
            for (int j = idx.indices().back() + 1; j < num_sets(); ++j) {
                auto common = intersect(cells, sets_[static_cast<std::size_t>(j)]);
                if (!common.empty()) {
                    auto ext = idx.indices();
                    ext.push_back(j);
                    next.emplace_back(MultiIndex(std::move(ext)), std::move(common));
                }
            }
        }
        if (next.empty()) {
            break;
        }
        std::sort(next.begin(), next.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        raw.push_back(std::move(next));
    }

    for (std::size_t p = 0; p < raw.size(); ++p) {
        std::vector<Patch> lvl;
        lvl.reserve(raw[p].size());
        for (auto& [idx, cells] : raw[p]) {
            lookup_.emplace(idx, PatchRef{static_cast<int>(p), static_cast<Index>(lvl.size())});
            lvl.push_back(Patch{idx, SubMesh(mesh_, std::move(cells))});
        }
        levels_.push_back(std::move(lvl));
    }

    for (int p = 0; p + 1 <= max_level(); ++p) {
        const auto& upper = levels_[static_cast<std::size_t>(p + 1)];
        for (Index pos = 0; pos < static_cast<Index>(upper.size()); ++pos) {
            const Patch& to = upper[static_cast<std::size_t>(pos)];
            for (std::size_t j = 0; j < to.index.size(); ++j) {
                const PatchRef from_ref = lookup_.at(to.index.without(j));
                const Patch& from = patch(from_ref);
                const PatchRef to_ref{p + 1, pos};
                for (int q = 0; q <= dim(); ++q) {
                    restrictions_.emplace(std::make_tuple(q, from_ref, to_ref),
                                          build_restriction(from.submesh, to.submesh, q));
                }
            }
        }
    }
}

const std::vector<Patch>& Cover::level(int p) const {
    if (p < 0 || p > max_level()) {
        static const std::vector<Patch> empty;
        return empty;
    }
    return levels_[static_cast<std::size_t>(p)];
}

const Patch& Cover::patch(const PatchRef& ref) const {
    const auto& lvl = level(ref.level);
    if (ref.position < 0 || ref.position >= static_cast<Index>(lvl.size())) {
        throw UnknownIndexError("Cover: patch reference out of range");
    }
    return lvl[static_cast<std::size_t>(ref.position)];
}

std::optional<PatchRef> Cover::find(const MultiIndex& index) const {
    const auto it = lookup_.find(index);
    if (it == lookup_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<std::pair<PatchRef, int>> Cover::find_oriented(const std::vector<int>& indices) const {
    std::vector<int> work = indices;
    int sign = 1;
    // Insertion sort, counting transpositions.
    for (std::size_t i = 1; i < work.size(); ++i) {
        for (std::size_t j = i; j > 0 && work[j - 1] > work[j]; --j) {
            std::swap(work[j - 1], work[j]);
            sign = -sign;
        }
    }
    for (std::size_t i = 1; i < work.size(); ++i) {
        if (work[i] == work[i - 1]) {
            return std::nullopt;
        }
    }
    if (work.empty()) {
        return std::nullopt;
    }
    const auto ref = find(MultiIndex(std::move(work)));
    if (!ref) {
        return std::nullopt;
    }
    return std::make_pair(*ref, sign);
}

const SparseMatrix& Cover::restriction(int q, const PatchRef& from, const PatchRef& to) const {
    const auto it = restrictions_.find(std::make_tuple(q, from, to));
    if (it == restrictions_.end()) {
        throw UnknownIndexError("Cover: no restriction between the given patches");
    }
    return it->second;
}

CoverPtr build_cover(MeshPtr mesh, std::vector<std::vector<Index>> sets) {
    return std::make_shared<const Cover>(std::move(mesh), std::move(sets));
}

std::vector<Index> intersection_cells(const Cover& cover, const MultiIndex& index) {
    if (index.size() == 0) {
        throw UnknownIndexError("intersection_cells: empty multi-index");
    }
    for (const int i : index.indices()) {
        if (i < 0 || i >= cover.num_sets()) {
            std::ostringstream msg;
            msg << "intersection_cells: unknown set index " << i;
            throw UnknownIndexError(msg.str());
        }
    }
    std::vector<Index> cells = cover.set(index[0]);
    for (std::size_t j = 1; j < index.size(); ++j) {
        cells = intersect(cells, cover.set(index[j]));
    }
    return cells;
}

std::vector<Index> select_cells(const Mesh& mesh, const std::function<bool(const Point&)>& predicate) {
    std::vector<Index> out;
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        if (predicate(mesh.barycenter(mesh.dim(), c))) {
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace cdr
