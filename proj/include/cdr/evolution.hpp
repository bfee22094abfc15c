#pragma once

// Implicit time stepping for the Hodge heat and wave equations
//   d_t^l alpha + Laplace_D alpha = phi,  l in {1, 2}.

#include <memory>
#include <vector>

#include "cdr/hodge.hpp"

namespace cdr {

struct TransientState {
    double t = 0.0;
    Cochain alpha;
    Cochain velocity;  // wave only; empty for heat
};

/// Per-step diagnostics written to the energy time series.
struct EnergyRow {
    double t = 0.0;
    double energy = 0.0;
    double norm_alpha = 0.0;
    double norm_d_alpha = 0.0;
    double norm_d_star_alpha = 0.0;
};

/// Norms shared by both steppers; owns the degree-k operator bundle.
class EnergyMeter {
public:
    EnergyMeter(const Complex& complex, int k, const WeightSet& weights, bool allow_degenerate = false);

    const DegreeOperators& operators() const { return ops_; }
    double norm(const Vector& x) const;
    double norm_d(const Vector& x) const;
    double norm_d_star(const Vector& x) const;
    /// D*_k x as a vector of degree k-1.
    Vector d_star(const Vector& x) const;

protected:
    DegreeOperators ops_;
    std::shared_ptr<const linalg::SpdSolver> lower_solver_;
};

/// Implicit Euler: (M + dt L) alpha^{n+1} = M alpha^n + dt M phi, with L in
/// mixed form for k > 0.
class HeatStepper : public EnergyMeter {
public:
    HeatStepper(const Complex& complex, int k, const WeightSet& weights, double dt, bool allow_degenerate = false);

    double dt() const { return dt_; }
    TransientState step(const TransientState& state, const Cochain& source) const;
    /// energy = 1/2 ||alpha||^2.
    EnergyRow diagnostics(const TransientState& state) const;

private:
    double dt_;
    std::unique_ptr<linalg::SymmetricSolver> solver_;
};

/// Implicit midpoint on (alpha, v). Conserves
/// 1/2 ||v||^2 + 1/2 ||D alpha||^2 + 1/2 ||D* alpha||^2 when phi = 0.
class WaveStepper : public EnergyMeter {
public:
    WaveStepper(const Complex& complex, int k, const WeightSet& weights, double dt, bool allow_degenerate = false);

    double dt() const { return dt_; }
    TransientState step(const TransientState& state, const Cochain& source) const;
    EnergyRow diagnostics(const TransientState& state) const;
    double energy(const TransientState& state) const;

private:
    double dt_;
    std::unique_ptr<linalg::SymmetricSolver> solver_;
};

/// Runs n steps and returns one diagnostics row per state (n + 1 rows).
template <class Stepper>
std::vector<EnergyRow> run(const Stepper& stepper, TransientState& state, const Cochain& source, int steps) {
    std::vector<EnergyRow> rows;
    rows.reserve(static_cast<std::size_t>(steps) + 1);
    rows.push_back(stepper.diagnostics(state));
    for (int n = 0; n < steps; ++n) {
        state = stepper.step(state, source);
        rows.push_back(stepper.diagnostics(state));
    }
    return rows;
}

}  // namespace cdr
