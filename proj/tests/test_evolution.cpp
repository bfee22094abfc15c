#include <doctest.h>

#include <numbers>
#include <random>

#include "cdr/evolution.hpp"
#include "fixtures.hpp"

using namespace cdr;

namespace {

template <class Stepper>
TransientState advance(const Stepper& s, TransientState state, const Cochain& source, int steps) {
    for (int n = 0; n < steps; ++n) {
        state = s.step(state, source);
    }
    return state;
}

/// Smooth degree-0 data on the rods: a low cosine mode in each rod.
Cochain smooth_rods(const models::Model& model) {
    return models::project_scalars(*model.complex,
                                   {[](const Point& x, Index) { return std::cos(std::numbers::pi * (x.x() + 1) / 1.25); },
                                    [](const Point& x, Index) { return 0.5 * std::sin(2.0 * x.x()); }});
}

/// Part of a random cochain orthogonal to the harmonic space.
Cochain off_kernel(const Complex& cx, int k, const WeightSet& w, std::mt19937_64& rng) {
    const HarmonicBasis h = harmonic_basis(cx, k, w);
    const DegreeOperators ops = assemble_operators(cx, k, w);
    Vector a = cx.random(k, rng).values();
    a -= h.vectors * (h.vectors.transpose() * (ops.mass * a));
    return Cochain(cx.layout(k), a);
}

}  // namespace

TEST_CASE("heat: harmonic initial data is steady") {
    const auto model = models::build_rods({});
    const Complex& cx = *model.complex;
    const HarmonicBasis h = harmonic_basis(cx, 0, model.weights);
    const HeatStepper heat(cx, 0, model.weights, 0.1);
    TransientState s{0.0, h.vector(0), {}};
    const TransientState end = advance(heat, s, cx.zero(0), 20);
    CHECK((end.alpha.values() - s.alpha.values()).norm() <= 1e-12);
    CHECK(end.t == doctest::Approx(2.0));
}

TEST_CASE("heat: monotone decay off the kernel") {
    std::mt19937_64 rng(1);
    SUBCASE("rods, degree 0") {
        const auto model = models::build_rods({.w01 = 4.0});
        const Complex& cx = *model.complex;
        const HeatStepper heat(cx, 0, model.weights, 0.01);
        TransientState s{0.0, off_kernel(cx, 0, model.weights, rng), {}};
        const auto rows = run(heat, s, cx.zero(0), 100);
        for (std::size_t n = 1; n < rows.size(); ++n) {
            CHECK(rows[n].norm_alpha < rows[n - 1].norm_alpha);
        }
    }
    SUBCASE("square with a hole, degree 1") {
        const Complex cx(fixtures::hole_cover());
        const WeightSet w = fixtures::random_weights(cx, rng);
        const HeatStepper heat(cx, 1, w, 0.05);
        TransientState s{0.0, off_kernel(cx, 1, w, rng), {}};
        const auto rows = run(heat, s, cx.zero(1), 50);
        for (std::size_t n = 1; n < rows.size(); ++n) {
            CHECK(rows[n].norm_alpha < rows[n - 1].norm_alpha);
        }
    }
}

TEST_CASE("heat: steady state equals the elliptic solve") {
    models::RodsConfig c;
    c.w01 = 2.0;
    c.f0 = [](const Point& x, Index) { return std::cos(2 * x.x()); };
    c.f1 = [](const Point& x, Index) { return x.x(); };
    const auto model = models::build_rods(c);
    const Complex& cx = *model.complex;
    const HodgeSolution elliptic = solve_primal_k0(model.problem());
    // Remove the harmonic part of the source so the flow has a limit.
    const HarmonicBasis h = harmonic_basis(cx, 0, model.weights);
    const DegreeOperators ops = assemble_operators(cx, 0, model.weights);
    Vector phi = model.source.values();
    phi -= h.vectors * (h.vectors.transpose() * (ops.mass * phi));
    const HeatStepper heat(cx, 0, model.weights, 0.5);
    const TransientState end = advance(heat, TransientState{0.0, cx.zero(0), {}}, Cochain(cx.layout(0), phi), 400);
    CHECK(heat.norm(end.alpha.values() - elliptic.alpha.values()) <= 1e-6);
}

TEST_CASE("wave: harmonic state at rest stays put") {
    const auto model = models::build_rods({});
    const Complex& cx = *model.complex;
    const HarmonicBasis h = harmonic_basis(cx, 0, model.weights);
    const WaveStepper wave(cx, 0, model.weights, 0.1);
    const TransientState s{0.0, h.vector(0), cx.zero(0)};
    const TransientState end = advance(wave, s, cx.zero(0), 50);
    // Constant up to the 1e-10 relative solver tolerance.
    const double scale = s.alpha.values().norm();
    CHECK((end.alpha.values() - s.alpha.values()).norm() <= 1e-10 * scale);
    CHECK(end.velocity.values().norm() <= 1e-10 * scale);
}

TEST_CASE("wave: midpoint energy is conserved over 1000 steps") {
    std::mt19937_64 rng(2);
    SUBCASE("rods, degree 0") {
        const auto model = models::build_rods({.w0 = 2.0, .w01 = 3.0});
        const Complex& cx = *model.complex;
        const WaveStepper wave(cx, 0, model.weights, 0.01);
        TransientState s{0.0, cx.random(0, rng), cx.random(0, rng)};
        const double e0 = wave.energy(s);
        const auto rows = run(wave, s, cx.zero(0), 1000);
        double drift = 0.0;
        for (const auto& r : rows) {
            drift = std::max(drift, std::abs(r.energy - e0) / e0);
        }
        CHECK(drift <= 1e-9);
    }
    SUBCASE("square, degree 1 (the D* part contributes)") {
        const Complex cx(fixtures::square_cover(3));
        const WeightSet w = fixtures::random_weights(cx, rng);
        const WaveStepper wave(cx, 1, w, 0.01);
        TransientState s{0.0, cx.random(1, rng), cx.random(1, rng)};
        const double e0 = wave.energy(s);
        const auto rows = run(wave, s, cx.zero(1), 1000);
        CHECK(rows.front().norm_d_star_alpha > 0.0);
        double drift = 0.0;
        for (const auto& r : rows) {
            drift = std::max(drift, std::abs(r.energy - e0) / e0);
        }
        CHECK(drift <= 1e-9);
    }
}

TEST_CASE("self-convergence: heat is first order, wave second order") {
    const auto model = models::build_rods({.cells_per_unit = 8, .w01 = 2.0});
    const Complex& cx = *model.complex;
    const Cochain a0 = smooth_rods(model);
    const double t_end = 0.2;
    auto final_heat = [&](int steps) {
        const HeatStepper heat(cx, 0, model.weights, t_end / steps);
        return advance(heat, TransientState{0.0, a0, {}}, cx.zero(0), steps).alpha.values();
    };
    auto final_wave = [&](int steps) {
        const WaveStepper wave(cx, 0, model.weights, t_end / steps);
        return advance(wave, TransientState{0.0, a0, cx.zero(0)}, cx.zero(0), steps).alpha.values();
    };
    const HeatStepper meter(cx, 0, model.weights, 1.0);
    for (const bool is_wave : {false, true}) {
        CAPTURE(is_wave);
        std::vector<Vector> sol;
        for (int steps : {10, 20, 40, 80}) {
            sol.push_back(is_wave ? final_wave(steps) : final_heat(steps));
        }
        std::vector<double> err;
        for (std::size_t i = 0; i + 1 < sol.size(); ++i) {
            err.push_back(meter.norm(sol[i] - sol[i + 1]));
        }
        for (std::size_t i = 0; i + 1 < err.size(); ++i) {
            const double rate = std::log2(err[i] / err[i + 1]);
            CAPTURE(rate);
            if (is_wave) {
                CHECK(rate >= 1.8);
                CHECK(rate <= 2.2);
            } else {
                CHECK(rate >= 0.8);
                CHECK(rate <= 1.2);
            }
        }
    }
}

TEST_CASE("wave: a pulse in rod 0 reaches rod 1 only through the joint") {
    // Pulse centred at x = -0.6, rod 1 at rest; the overlap starts at -0.25
    // and the wave speed is 1, so rod 1 stays quiet for t well below 0.2.
    const auto model = models::build_rods({.epsilon = 0.25, .cells_per_unit = 64, .w01 = 20.0});
    const Complex& cx = *model.complex;
    const Cochain a0 = models::project_scalars(
        cx, {[](const Point& x, Index) { return std::exp(-200 * (x.x() + 0.6) * (x.x() + 0.6)); }, models::constant_field(0.0)});
    const LayoutPtr lay = cx.layout(0);
    auto rod1 = [&](const Cochain& a) { return a.block(1).cwiseAbs().maxCoeff(); };

    auto arrival = [&](double dt, double t_end, std::vector<double>* trace) {
        const WaveStepper wave(cx, 0, model.weights, dt);
        TransientState s{0.0, a0, cx.zero(0)};
        double first = -1.0;
        const int steps = static_cast<int>(std::lround(t_end / dt));
        for (int n = 0; n < steps; ++n) {
            s = wave.step(s, cx.zero(0));
            if (trace) {
                trace->push_back(rod1(s.alpha));
            }
            if (first < 0 && rod1(s.alpha) > 1e-2) {
                first = s.t;
            }
        }
        return first;
    };
    std::vector<double> trace;
    const double coarse = arrival(0.004, 0.6, &trace);
    const double fine = arrival(0.001, 0.6, nullptr);
    REQUIRE(coarse > 0.0);
    REQUIRE(fine > 0.0);
    CHECK(coarse > 0.15);
    CHECK(std::abs(coarse - fine) <= 0.02);
    // Quiet before t = 0.1, then the signal in rod 1 grows up to arrival.
    const auto quiet_end = static_cast<std::size_t>(0.1 / 0.004);
    for (std::size_t n = 0; n < quiet_end; ++n) {
        CHECK(trace[n] < 1e-3);
    }
    const auto arrive = static_cast<std::size_t>(std::lround(coarse / 0.004)) - 1;
    for (std::size_t n = quiet_end + 1; n <= arrive; ++n) {
        CHECK(trace[n] >= trace[n - 1]);
    }
}

TEST_CASE("energy rows report the documented norms") {
    std::mt19937_64 rng(3);
    const Complex cx(fixtures::square_cover(2));
    const WeightSet w = WeightSet::unit(cx);
    const WaveStepper wave(cx, 1, w, 0.1);
    const TransientState s{0.0, cx.random(1, rng), cx.random(1, rng)};
    const EnergyRow r = wave.diagnostics(s);
    const double v = wave.norm(s.velocity.values());
    CHECK(r.energy == doctest::Approx(0.5 * (v * v + r.norm_d_alpha * r.norm_d_alpha +
                                             r.norm_d_star_alpha * r.norm_d_star_alpha)));
    const Vector ds = cx.codifferential(1, w).apply(s.alpha.values());
    CHECK((wave.d_star(s.alpha.values()) - ds).norm() <= 1e-10 * ds.norm());
    const HeatStepper heat(cx, 1, w, 0.1);
    CHECK(heat.diagnostics(s).energy == doctest::Approx(0.5 * r.norm_alpha * r.norm_alpha));
    CHECK_THROWS_AS(HeatStepper(cx, 1, w, 0.0), std::invalid_argument);
}
