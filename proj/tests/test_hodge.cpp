#include <doctest.h>

#include <numbers>
#include <random>

#include "cdr/hodge.hpp"
#include "fixtures.hpp"

using namespace cdr;

namespace {

/// dim A^k - rank D^k - rank D^{k-1} from floating-point SVD ranks, an
/// oracle independent of the exact integer elimination in the library.
Index svd_cohomology(const Complex& cx, int k) {
    auto rank = [](const SparseMatrix& m) -> Index {
        if (m.rows() == 0 || m.cols() == 0) {
            return 0;
        }
        const Vector s = linalg::singular_values(DenseMatrix(m));
        Index r = 0;
        for (Index i = 0; i < s.size(); ++i) {
            r += s(i) > 1e-9 * s(0) ? 1 : 0;
        }
        return r;
    };
    return cx.layout(k)->size() - rank(cx.total_derivative(k).matrix) - rank(cx.total_derivative(k - 1).matrix);
}

Cochain random_source(const Complex& cx, int k, std::mt19937_64& rng) { return cx.random(k, rng); }

}  // namespace

TEST_CASE("harmonic basis: interval with a good two-set cover") {
    const Complex cx(fixtures::rods_cover(8));
    const WeightSet w = WeightSet::unit(cx);
    const HarmonicBasis h0 = harmonic_basis(cx, 0, w);
    REQUIRE(h0.dimension() == 1);
    // The constant tuple (c, c).
    const Vector v = h0.vectors.col(0);
    CHECK(v.maxCoeff() - v.minCoeff() <= 1e-12 * v.cwiseAbs().maxCoeff());
    CHECK(harmonic_basis(cx, 1, w).dimension() == 0);
    CHECK(harmonic_basis(cx, 2, w).dimension() == 0);
    CHECK(svd_cohomology(cx, 1) == 0);
    CHECK(svd_cohomology(cx, 2) == 0);
}

TEST_CASE("cohomology: interval, square, square with a hole") {
    CHECK(cohomology_dims(Complex(fixtures::rods_cover())) == std::vector<Index>{1, 0, 0});
    CHECK(cohomology_dims(Complex(fixtures::square_cover())) == std::vector<Index>{1, 0, 0, 0});
    CHECK(cohomology_dims(Complex(fixtures::hole_cover())) == std::vector<Index>{1, 1, 0, 0});
    const Complex hole(fixtures::hole_cover());
    CHECK(harmonic_basis(hole, 1, WeightSet::unit(hole)).dimension() == 1);
}

TEST_CASE("property: harmonic dimensions agree with both rank oracles, any weights") {
    std::mt19937_64 rng(4);
    for (const auto& [name, cover] : fixtures::test_covers()) {
        CAPTURE(name);
        const Complex cx(cover);
        const auto dims = cohomology_dims(cx);
        const WeightSet w = fixtures::random_weights(cx, rng);
        for (int k = 0; k <= cx.max_degree(); ++k) {
            CAPTURE(k);
            CHECK(dims[static_cast<std::size_t>(k)] == svd_cohomology(cx, k));
            const HarmonicBasis h = harmonic_basis(cx, k, w);
            CHECK(h.dimension() == dims[static_cast<std::size_t>(k)]);
            if (h.dimension() == 0) {
                continue;
            }
            const DegreeOperators ops = assemble_operators(cx, k, w);
            const DenseMatrix gram = h.vectors.transpose() * (ops.mass * h.vectors);
            CHECK((gram - DenseMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-10);
            CHECK((ops.d * h.vectors).cwiseAbs().maxCoeff() <= 1e-8);
            if (ops.d_lower.cols() > 0) {
                CHECK((DenseMatrix(ops.coupling.transpose()) * h.vectors).cwiseAbs().maxCoeff() <= 1e-8);
            }
        }
    }
}

TEST_CASE("solve: zero source gives zero") {
    const auto model = models::build_rods({});
    const HodgeSolution s = solve_primal_k0(model.problem());
    CHECK(s.alpha.values().cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.kernel_dim == 1);
}

TEST_CASE("solve: primal k = 0 against a hand-assembled saddle system") {
    // [K, M H; (M H)^T, 0] [a; p] = [M phi; 0] with K = D^T M_1 D.
    models::RodsConfig c;
    c.cells_per_unit = 8;
    c.w0 = 2.0;
    c.w1 = 0.5;
    c.w01 = 3.0;
    c.f0 = [](const Point& x, Index) { return std::cos(3 * x.x()); };
    c.f1 = [](const Point& x, Index) { return x.x() * x.x(); };
    const auto model = models::build_rods(c);
    const Complex& cx = *model.complex;
    const DegreeOperators ops = assemble_operators(cx, 0, model.weights);
    const HarmonicBasis h = harmonic_basis(cx, 0, model.weights);
    const Index n = ops.mass.rows();
    const Index m = h.dimension();
    DenseMatrix sys = DenseMatrix::Zero(n + m, n + m);
    sys.topLeftCorner(n, n) = DenseMatrix(ops.stiffness);
    const DenseMatrix mh = ops.mass * h.vectors;
    sys.topRightCorner(n, m) = mh;
    sys.bottomLeftCorner(m, n) = mh.transpose();
    Vector rhs = Vector::Zero(n + m);
    // Source with its harmonic part removed, as the solver does.
    Vector phi = model.source.values();
    phi -= h.vectors * (mh.transpose() * phi);
    rhs.head(n) = ops.mass * phi;
    const Vector oracle = sys.fullPivLu().solve(rhs).head(n);

    const HodgeSolution primal = solve_primal_k0(model.problem());
    const HodgeSolution mixed = solve_mixed(model.problem());
    CHECK((primal.alpha.values() - oracle).cwiseAbs().maxCoeff() <= 1e-9 * oracle.cwiseAbs().maxCoeff());
    CHECK((mixed.alpha.values() - oracle).cwiseAbs().maxCoeff() <= 1e-9 * oracle.cwiseAbs().maxCoeff());
    CHECK_THROWS_AS(solve_primal_k0(HodgeProblem{model.complex, 1, model.weights, cx.zero(1), false}),
                    std::invalid_argument);
}

TEST_CASE("solve: antisymmetric forcing on symmetric rods") {
    // f_1(x) = -f_0(-x) with mirrored geometry gives a_1(x) = -a_0(-x).
    models::RodsConfig c;
    c.cells_per_unit = 16;
    c.w0 = c.w1 = 1.5;
    c.w01 = 2.0;
    c.f0 = [](const Point& x, Index) { return std::exp(x.x()) - 0.3; };
    c.f1 = [](const Point& x, Index) { return -(std::exp(-x.x()) - 0.3); };
    const auto model = models::build_rods(c);
    const HodgeSolution s = solve_primal_k0(model.problem());
    const auto values = models::vertex_values(*model.complex, s.alpha);
    double scale = 0.0;
    for (const auto& v : values) {
        scale = std::max(scale, std::abs(v.value));
    }
    REQUIRE(scale > 0.0);
    for (const auto& v : values) {
        if (v.set != 0) {
            continue;
        }
        bool found = false;
        for (const auto& w : values) {
            if (w.set == 1 && std::abs(w.x.x() + v.x.x()) < 1e-12) {
                CHECK(std::abs(w.value + v.value) <= 1e-10 * scale);
                found = true;
            }
        }
        CHECK(found);
    }
}

TEST_CASE("solve: top degree on two rods is a reaction-diffusion problem on the overlap") {
    // A^2 = A^{1,1}: piecewise constants g on U_01. With P1 auxiliary
    // unknowns on the overlap the operator is B M0^{-1} B^T M2 + 2 I.
    const Index cells_per_unit = 8;
    const double eps = 0.25;
    const auto cover = fixtures::rods_cover(2 * cells_per_unit, eps);
    const auto cx = fixtures::make_complex(cover);
    const WeightSet w = WeightSet::unit(*cx);
    REQUIRE(cx->max_degree() == 2);
    const LayoutPtr top = cx->layout(2);
    REQUIRE(top->num_blocks() == 1);
    const Index m = top->size();  // overlap cells
    const double h = 1.0 / static_cast<double>(cells_per_unit);
    CHECK(m == 4);

    DenseMatrix m0 = DenseMatrix::Zero(m + 1, m + 1);
    DenseMatrix b = DenseMatrix::Zero(m, m + 1);
    for (Index e = 0; e < m; ++e) {
        m0(e, e) += h / 3;
        m0(e + 1, e + 1) += h / 3;
        m0(e, e + 1) += h / 6;
        m0(e + 1, e) += h / 6;
        b(e, e) = -1.0;
        b(e, e + 1) = 1.0;
    }
    const DenseMatrix m2 = DenseMatrix::Identity(m, m) / h;
    const DenseMatrix op = b * m0.inverse() * b.transpose() * m2 + 2.0 * DenseMatrix::Identity(m, m);

    std::mt19937_64 rng(12);
    const Cochain phi = cx->random(2, rng);
    const Vector oracle = op.fullPivLu().solve(phi.values());
    const HodgeSolution s = solve_mixed(HodgeProblem{cx, 2, w, phi, false});
    CHECK(s.kernel_dim == 0);
    CHECK((s.alpha.values() - oracle).norm() <= 1e-10 * oracle.norm());
}

TEST_CASE("solve: unit weights on a full overlap match the d and delta Laplacians") {
    const auto cx = fixtures::make_complex(fixtures::full_overlap_cover(2));
    const WeightSet w = WeightSet::unit(*cx);
    std::mt19937_64 rng(6);
    for (int k = 1; k < cx->max_degree(); ++k) {
        const Cochain phi = cx->random(k, rng);
        const HodgeSolution s = solve_mixed(HodgeProblem{cx, k, w, phi, false});
        const Laplacians lap = cx->laplacians(k, w);
        const HarmonicBasis hb = harmonic_basis(*cx, k, w);
        const DegreeOperators ops = assemble_operators(*cx, k, w);
        Vector target = phi.values() - hb.vectors * (hb.vectors.transpose() * (ops.mass * phi.values()));
        const Vector got = (lap.d_part + lap.delta_part) * s.alpha.values();
        CHECK((got - target).norm() <= 1e-8 * target.norm());
    }
}

TEST_CASE("property: solves are well posed on every test cover and degree") {
    std::mt19937_64 rng(31);
    for (const auto& [name, cover] : fixtures::test_covers()) {
        CAPTURE(name);
        const auto cx = fixtures::make_complex(cover);
        const WeightSet w = fixtures::random_weights(*cx, rng);
        for (int k = 0; k <= cx->max_degree(); ++k) {
            CAPTURE(k);
            const HodgeSolution s = solve_mixed(HodgeProblem{cx, k, w, random_source(*cx, k, rng), false});
            CHECK(s.system_residual <= 1e-8);
            CHECK(s.laplacian_residual <= 1e-8);
            CHECK(s.harmonic_orthogonality <= 1e-10);
            CHECK(s.source_projected == (s.kernel_dim > 0));
            // beta = D alpha and gamma = D* alpha as documented.
            const Vector beta = cx->total_derivative(k).matrix * s.alpha.values();
            CHECK((s.beta.values() - beta).norm() <= 1e-12 * std::max(1.0, beta.norm()));
            if (k > 0) {
                const Vector gamma = cx->codifferential(k, w).apply(s.alpha.values());
                CHECK((s.gamma.values() - gamma).norm() <= 1e-8 * std::max(1.0, gamma.norm()));
            }
        }
    }
}

TEST_CASE("decomposition: exact and harmonic inputs are fixed points") {
    std::mt19937_64 rng(13);
    const Complex cx(fixtures::hole_cover());
    const WeightSet w = fixtures::random_weights(cx, rng);
    const HodgeDecomposer dec(cx, 1, w);
    const Cochain eta = cx.random(0, rng);
    const Cochain omega = cx.total_derivative(0).apply(eta);
    const HodgeDecomposition d = dec.decompose(omega);
    const double n = omega.values().norm();
    CHECK(d.harmonic.values().norm() <= 1e-9 * n);
    CHECK(d.coexact.values().norm() <= 1e-9 * n);
    CHECK((d.exact.values() - omega.values()).norm() <= 1e-9 * n);

    REQUIRE(dec.harmonic().dimension() == 1);
    const Cochain hv = dec.harmonic().vector(0);
    const HodgeDecomposition dh = dec.decompose(hv);
    CHECK(dh.exact.values().norm() <= 1e-9 * hv.values().norm());
    CHECK(dh.coexact.values().norm() <= 1e-9 * hv.values().norm());
}

TEST_CASE("decomposition: random 1-cochain on the square with a hole") {
    std::mt19937_64 rng(14);
    const Complex cx(fixtures::hole_cover());
    const WeightSet w = WeightSet::unit(cx);
    const HodgeDecomposition d = hodge_decompose(cx, 1, w, cx.random(1, rng));
    CHECK(d.exact.values().norm() > 1e-3);
    CHECK(d.harmonic.values().norm() > 1e-3);
    CHECK(d.coexact.values().norm() > 1e-3);
}

TEST_CASE("property: decomposition reconstructs and is orthogonal") {
    std::mt19937_64 rng(15);
    for (const auto& [name, cover] : fixtures::test_covers()) {
        CAPTURE(name);
        const Complex cx(cover);
        const WeightSet w = fixtures::random_weights(cx, rng);
        for (int k = 0; k <= cx.max_degree(); ++k) {
            CAPTURE(k);
            const HodgeDecomposer dec(cx, k, w);
            const DegreeOperators ops = assemble_operators(cx, k, w);
            const SparseMatrix& m = dec.mass();
            double worst_rec = 0.0, worst_orth = 0.0, worst_closed = 0.0, worst_co = 0.0;
            for (int trial = 0; trial < 50; ++trial) {
                const Cochain omega = cx.random(k, rng);
                const HodgeDecomposition d = dec.decompose(omega);
                const double n2 = inner(m, omega.values(), omega.values());
                const Vector rec = d.exact.values() + d.harmonic.values() + d.coexact.values();
                worst_rec = std::max(worst_rec, norm(m, omega.values() - rec) / std::sqrt(n2));
                worst_orth = std::max({worst_orth, std::abs(inner(m, d.exact.values(), d.harmonic.values())) / n2,
                                       std::abs(inner(m, d.exact.values(), d.coexact.values())) / n2,
                                       std::abs(inner(m, d.harmonic.values(), d.coexact.values())) / n2});
                // exact = D eta, closed; coexact orthogonal to ker D^k.
                const Vector deta = cx.total_derivative(k - 1).matrix * d.potential.values();
                worst_closed = std::max(worst_closed, (deta - d.exact.values()).norm() / std::sqrt(n2));
                if (ops.d_lower.cols() > 0) {
                    const Vector r = ops.coupling.transpose() * d.coexact.values();
                    worst_co = std::max(worst_co, r.norm() / std::sqrt(n2));
                }
            }
            CHECK(worst_rec <= 1e-10);
            CHECK(worst_orth <= 1e-10);
            CHECK(worst_closed <= 1e-9);
            CHECK(worst_co <= 1e-9);
        }
    }
}

TEST_CASE("Poincare constant on (0,1) against the Neumann eigenvalue") {
    const Index n = 64;
    const auto mesh = build_interval_mesh(0.0, 1.0, n);
    std::vector<Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    const Complex cx(build_cover(mesh, {all}));
    const WeightSet w = WeightSet::unit(cx);
    const double c0 = poincare_constant(cx, 0, w);
    CHECK(std::abs(c0 * std::numbers::pi - 1.0) <= 0.02);

    // Oracle: P1 stiffness/mass pencil assembled by hand.
    const double h = 1.0 / static_cast<double>(n);
    DenseMatrix k = DenseMatrix::Zero(n + 1, n + 1), m = DenseMatrix::Zero(n + 1, n + 1);
    for (Index e = 0; e < n; ++e) {
        k(e, e) += 1 / h;
        k(e + 1, e + 1) += 1 / h;
        k(e, e + 1) -= 1 / h;
        k(e + 1, e) -= 1 / h;
        m(e, e) += h / 3;
        m(e + 1, e + 1) += h / 3;
        m(e, e + 1) += h / 6;
        m(e + 1, e) += h / 6;
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> eig(k, m);
    const double lambda1 = eig.eigenvalues()(1);  // eigenvalue 0 belongs to the constants
    CHECK(c0 == doctest::Approx(1.0 / std::sqrt(lambda1)).epsilon(1e-9));

    // Scaling the upper weights by 4 halves the constant.
    WeightSet w4 = w;
    w4.set(1, w.at(1).scaled(4.0));
    CHECK(poincare_constant(cx, 0, w4) == doctest::Approx(c0 / 2).epsilon(1e-10));
    CHECK_THROWS_AS(poincare_constant(cx, 1, w), std::domain_error);
}

TEST_CASE("Poincare constant is stable under refinement on the rods cover") {
    const Complex coarse(fixtures::rods_cover(32));
    const Complex fine(fixtures::rods_cover(64));
    for (int k = 0; k < 2; ++k) {
        const double a = poincare_constant(coarse, k, WeightSet::unit(coarse));
        const double b = poincare_constant(fine, k, WeightSet::unit(fine));
        CHECK(std::abs(a - b) <= 0.05 * b);
    }
}

TEST_CASE("property: Poincare inequality holds on kernel-orthogonal samples") {
    std::mt19937_64 rng(16);
    for (const auto& [name, cover] : fixtures::test_covers()) {
        CAPTURE(name);
        const Complex cx(cover);
        const WeightSet w = fixtures::random_weights(cx, rng);
        for (int k = 0; k < cx.max_degree(); ++k) {
            CAPTURE(k);
            double c = 0.0;
            try {
                c = poincare_constant(cx, k, w);
            } catch (const std::domain_error&) {
                continue;
            }
            CHECK(c > 0.0);
            CHECK(std::isfinite(c));
            const HodgeDecomposer dec(cx, k, w);
            const DegreeOperators ops = assemble_operators(cx, k, w);
            int violations = 0;
            for (int trial = 0; trial < 100; ++trial) {
                const Vector a = dec.decompose(cx.random(k, rng)).coexact.values();
                const double lhs = norm(ops.mass, a);
                const double rhs = c * norm(ops.mass_upper, ops.d * a);
                violations += lhs <= rhs * (1.0 + 1e-9) ? 0 : 1;
            }
            CHECK(violations == 0);
        }
    }
}
