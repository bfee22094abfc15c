#pragma once

// Shared covers and helpers for the unit and acceptance suites.

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cdr/config.hpp"
#include "cdr/hodge.hpp"
#include "cdr/models.hpp"

namespace fixtures {

using namespace cdr;

inline ComplexPtr make_complex(CoverPtr cover) { return std::make_shared<const Complex>(std::move(cover)); }

inline CoverPtr split(MeshPtr mesh, const std::vector<std::function<bool(const Point&)>>& preds) {
    std::vector<std::vector<Index>> sets;
    for (const auto& p : preds) {
        sets.push_back(select_cells(*mesh, p));
    }
    return build_cover(std::move(mesh), sets);
}

/// (-1, 1) with U0 = (-1, eps), U1 = (-eps, 1).
inline CoverPtr rods_cover(Index cells = 8, double eps = 0.25) {
    return split(build_interval_mesh(-1.0, 1.0, cells), {[eps](const Point& p) { return p.x() < eps; },
                                                         [eps](const Point& p) { return p.x() > -eps; }});
}

/// Three intervals on (0,1) with a common triple overlap.
inline CoverPtr interval3_cover(Index cells = 10) {
    return split(build_interval_mesh(0.0, 1.0, cells), {[](const Point& p) { return p.x() < 0.6; },
                                                        [](const Point& p) { return p.x() > 0.3 && p.x() < 0.8; },
                                                        [](const Point& p) { return p.x() > 0.5; }});
}

/// Unit square split into two overlapping vertical strips.
inline CoverPtr square_cover(Index n = 4) {
    return split(build_triangle_mesh(0.0, 0.0, 1.0, 1.0, n, n),
                 {[](const Point& p) { return p.x() < 0.6; }, [](const Point& p) { return p.x() > 0.4; }});
}

/// Two copies of the whole square (full overlap).
inline CoverPtr full_overlap_cover(Index n = 3) {
    return split(build_triangle_mesh(0.0, 0.0, 1.0, 1.0, n, n),
                 {[](const Point&) { return true; }, [](const Point&) { return true; }});
}

/// Whole square plus a disk-shaped inclusion.
inline CoverPtr inclusion_cover(Index n = 6) {
    return split(build_triangle_mesh(0.0, 0.0, 1.0, 1.0, n, n),
                 {[](const Point&) { return true; },
                  [](const Point& p) { return (p - Point(0.5, 0.5)).norm() < 0.3; }});
}

inline CoverPtr from_preset(const std::string& json) {
    return config::build(config::parse(json).root).model.complex->cover_ptr();
}

/// [0,3]^2 minus the centre block, three-set ring cover.
inline CoverPtr hole_cover(Index per_unit = 1) {
    return from_preset(R"({"preset": "hole", "mesh": {"resolution": )" + std::to_string(per_unit) + "}}");
}

/// Each cell joins each of three sets with probability 1/2; orphans are
/// assigned at random. Not a good cover in general.
inline CoverPtr random3_cover(std::mt19937_64& rng, Index n = 3) {
    auto mesh = build_triangle_mesh(0.0, 0.0, 1.0, 1.0, n, n);
    std::vector<std::vector<Index>> sets(3);
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<int> pick(0, 2);
    for (Index c = 0; c < mesh->num_cells(); ++c) {
        bool any = false;
        for (auto& s : sets) {
            if (coin(rng)) {
                s.push_back(c);
                any = true;
            }
        }
        if (!any) {
            sets[static_cast<std::size_t>(pick(rng))].push_back(c);
        }
    }
    for (auto& s : sets) {
        if (s.empty()) {
            s.push_back(0);
        }
        std::sort(s.begin(), s.end());
    }
    return build_cover(mesh, sets);
}

struct NamedCover {
    std::string name;
    CoverPtr cover;
};

/// The standard test family used by the property and acceptance suites.
inline std::vector<NamedCover> test_covers() {
    std::mt19937_64 rng(2024);
    return {
        {"rods", rods_cover()},
        {"interval3", interval3_cover()},
        {"square", square_cover()},
        {"full-overlap", full_overlap_cover()},
        {"inclusion", inclusion_cover()},
        {"hole", hole_cover()},
        {"random3", random3_cover(rng)},
    };
}

/// Independent random weights in [lo, hi] on every cell of every block.
inline WeightSet random_weights(const Complex& complex, std::mt19937_64& rng, double lo = 0.5, double hi = 2.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    WeightSet w = WeightSet::unit(complex);
    for (int k = 0; k <= complex.max_degree(); ++k) {
        const LayoutPtr lay = complex.layout(k);
        std::vector<Vector> cells;
        for (const BlockIndex& b : lay->blocks()) {
            const auto n = static_cast<Index>(complex.cover().patch(b.patch()).submesh.cells().size());
            Vector v(n);
            for (Index i = 0; i < n; ++i) {
                v(i) = u(rng);
            }
            cells.push_back(v);
        }
        w.set(k, WeightField(lay, cells));
    }
    return w;
}

inline Vector random_vector(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vector v(n);
    for (Index i = 0; i < n; ++i) {
        v(i) = g(rng);
    }
    return v;
}

inline double max_abs(const SparseMatrix& m) {
    double out = 0.0;
    for (Index j = 0; j < m.outerSize(); ++j) {
        for (SparseMatrix::InnerIterator it(m, j); it; ++it) {
            out = std::max(out, std::abs(it.value()));
        }
    }
    return out;
}

}  // namespace fixtures
