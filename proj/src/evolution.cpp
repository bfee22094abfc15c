#include "cdr/evolution.hpp"

#include <cmath>

namespace cdr {

namespace {

void add_scaled(std::vector<Triplet>& trips, const SparseMatrix& m, Index row0, Index col0, double scale,
                bool transpose = false) {
    for (Index c = 0; c < m.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
            if (transpose) {
                trips.emplace_back(row0 + it.col(), col0 + it.row(), scale * it.value());
            } else {
                trips.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
            }
        }
    }
}

// [[lower_scale * M_{k-1}, (M D)^T], [M D, mass_scale * M + stiff_scale * K]]
std::unique_ptr<linalg::SymmetricSolver> factor(const DegreeOperators& ops, double lower_scale, double mass_scale,
                                                double stiff_scale) {
    const Index m = ops.lower->size();
    const Index n = ops.layout->size();
    std::vector<Triplet> trips;
    if (m > 0) {
        add_scaled(trips, ops.mass_lower, 0, 0, lower_scale);
        add_scaled(trips, ops.coupling, 0, m, 1.0, true);
        add_scaled(trips, ops.coupling, m, 0, 1.0);
    }
    add_scaled(trips, ops.mass, m, m, mass_scale);
    add_scaled(trips, ops.stiffness, m, m, stiff_scale);
    SparseMatrix system(m + n, m + n);
    system.setFromTriplets(trips.begin(), trips.end());
    system.makeCompressed();
    return std::make_unique<linalg::SymmetricSolver>(system);
}

void check_state(const DegreeOperators& ops, const TransientState& state, const Cochain& source) {
    if (state.alpha.size() != ops.layout->size() || source.size() != ops.layout->size()) {
        throw std::invalid_argument("time step: state or source has the wrong degree");
    }
}

}  // namespace

EnergyMeter::EnergyMeter(const Complex& complex, int k, const WeightSet& weights, bool allow_degenerate)
    : ops_(assemble_operators(complex, k, weights, allow_degenerate)) {
    if (ops_.lower->size() > 0) {
        lower_solver_ = std::make_shared<const linalg::SpdSolver>(ops_.mass_lower);
    }
}

double EnergyMeter::norm(const Vector& x) const { return cdr::norm(ops_.mass, x); }

double EnergyMeter::norm_d(const Vector& x) const { return std::sqrt(std::max(0.0, x.dot(ops_.stiffness * x))); }

Vector EnergyMeter::d_star(const Vector& x) const {
    if (!lower_solver_) {
        return Vector::Zero(0);
    }
    return lower_solver_->solve(Vector(ops_.coupling.transpose() * x));
}

double EnergyMeter::norm_d_star(const Vector& x) const {
    if (!lower_solver_) {
        return 0.0;
    }
    return cdr::norm(ops_.mass_lower, d_star(x));
}

HeatStepper::HeatStepper(const Complex& complex, int k, const WeightSet& weights, double dt, bool allow_degenerate)
    : EnergyMeter(complex, k, weights, allow_degenerate), dt_(dt) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("HeatStepper: dt must be positive");
    }
    solver_ = factor(ops_, -1.0, 1.0 / dt, 1.0);
}

TransientState HeatStepper::step(const TransientState& state, const Cochain& source) const {
    check_state(ops_, state, source);
    const Index m = ops_.lower->size();
    const Index n = ops_.layout->size();
    Vector rhs = Vector::Zero(m + n);
    rhs.tail(n) = ops_.mass * (state.alpha.values() / dt_ + source.values());
    const Vector sol = solver_->solve(rhs);
    TransientState next;
    next.t = state.t + dt_;
    next.alpha = Cochain(ops_.layout, sol.tail(n));
    return next;
}

EnergyRow HeatStepper::diagnostics(const TransientState& state) const {
    const Vector& a = state.alpha.values();
    EnergyRow row;
    row.t = state.t;
    row.norm_alpha = norm(a);
    row.norm_d_alpha = norm_d(a);
    row.norm_d_star_alpha = norm_d_star(a);
    row.energy = 0.5 * row.norm_alpha * row.norm_alpha;
    return row;
}

WaveStepper::WaveStepper(const Complex& complex, int k, const WeightSet& weights, double dt, bool allow_degenerate)
    : EnergyMeter(complex, k, weights, allow_degenerate), dt_(dt) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("WaveStepper: dt must be positive");
    }
    // Unknowns (g, v^{n+1}) with g = D* of the midpoint displacement.
    solver_ = factor(ops_, -4.0 / dt, 1.0 / dt, dt / 4.0);
}

TransientState WaveStepper::step(const TransientState& state, const Cochain& source) const {
    check_state(ops_, state, source);
    if (state.velocity.size() != ops_.layout->size()) {
        throw std::invalid_argument("WaveStepper: velocity has the wrong degree");
    }
    const Index m = ops_.lower->size();
    const Index n = ops_.layout->size();
    const Vector& a = state.alpha.values();
    const Vector& v = state.velocity.values();
    const Vector predictor = a + (dt_ / 4.0) * v;
    Vector rhs(m + n);
    if (m > 0) {
        rhs.head(m) = (-4.0 / dt_) * (ops_.coupling.transpose() * predictor);
    }
    rhs.tail(n) = ops_.mass * (v / dt_ + source.values()) - ops_.stiffness * predictor;
    const Vector sol = solver_->solve(rhs);
    const Vector v_next = sol.tail(n);
    TransientState next;
    next.t = state.t + dt_;
    next.alpha = Cochain(ops_.layout, a + (dt_ / 2.0) * (v + v_next));
    next.velocity = Cochain(ops_.layout, v_next);
    return next;
}

double WaveStepper::energy(const TransientState& state) const {
    const Vector& a = state.alpha.values();
    const double nv = norm(state.velocity.values());
    const double nd = norm_d(a);
    const double ns = norm_d_star(a);
    return 0.5 * (nv * nv + nd * nd + ns * ns);
}

EnergyRow WaveStepper::diagnostics(const TransientState& state) const {
    const Vector& a = state.alpha.values();
    EnergyRow row;
    row.t = state.t;
    row.norm_alpha = norm(a);
    row.norm_d_alpha = norm_d(a);
    row.norm_d_star_alpha = norm_d_star(a);
    row.energy = energy(state);
    return row;
}

}  // namespace cdr
