#pragma once

// Coupled-physics models expressed as degree-0 Hodge-Laplace problems on a
// two- (or N-) set cover:
//   rods           two elastic rods on (-1, eps) and (-eps, 1) joined on the overlap
//   multicontinuum N interpenetrating pressure fields on one square (double porosity)
//   inclusion      bulk pressure on a square plus a disk-shaped inclusion
//
// Block i of A^0 holds a_i on U_i. The weights of A^1 carry the physics:
// w_i on the gradient block of U_i and w_ij on the exchange block of U_ij.

#include <functional>
#include <string>
#include <vector>

#include "cdr/hodge.hpp"

namespace cdr::models {

/// Scalar field of position; also receives the parent cell index so
/// discontinuous (cell-wise) data such as cover indicators are exact.
using ScalarField = std::function<double(const Point& x, Index cell)>;

inline ScalarField constant_field(double c) {
    return [c](const Point&, Index) { return c; };
}

struct RodsConfig {
    double epsilon = 0.25;
    Index cells_per_unit = 16;
    double w0 = 1.0;
    double w1 = 1.0;
    double w01 = 1.0;
    ScalarField f0 = constant_field(0.0);
    ScalarField f1 = constant_field(0.0);
};

struct MultiContinuumConfig {
    int continua = 2;
    Index resolution = 8;
    std::vector<double> permeability{1.0, 1.0};
    /// Symmetric and nonnegative with a zero diagonal.
    DenseMatrix exchange = (DenseMatrix(2, 2) << 0.0, 1.0, 1.0, 0.0).finished();
    std::vector<ScalarField> forcing{constant_field(0.0), constant_field(0.0)};
    /// Adds the storage term d/dt a_i, i.e. permits heat stepping.
    bool compressible = false;
};

struct InclusionConfig {
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
    Index resolution = 16;
    Point center{0.5, 0.5};
    double radius = 0.2;
    double w0 = 1.0;
    double w1 = 1.0;
    double w01 = 1.0;
    ScalarField f0 = constant_field(0.0);
    ScalarField f1 = constant_field(0.0);
};

/// Raised for geometrically impossible configurations.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A configured degree-0 problem plus what is needed to post-process it.
struct Model {
    std::string name;
    ComplexPtr complex;
    WeightSet weights;
    std::vector<ScalarField> forcing;  // one per cover set
    bool allow_degenerate = false;
    /// Whether a time derivative is part of the model. Only the
    /// multicontinuum preset can switch it off.
    bool compressible = true;
    Cochain source;                    // L2 projection of the forcing

    HodgeProblem problem() const;
};

Model build_rods(const RodsConfig& config);
Model build_multicontinuum(const MultiContinuumConfig& config);
Model build_inclusion(const InclusionConfig& config);

/// Generic builder used by the presets. Set i carries w_i on its gradient
/// block and U_ij carries w_ij on its exchange block; every other weight
/// is 1. Zero exchange weights make the problem degenerate.
Model build_model(std::string name, CoverPtr cover, const std::vector<double>& set_weights,
                  const DenseMatrix& exchange, std::vector<ScalarField> forcing);

/// Replaces the forcing (one field per set) and re-projects the source.
void set_forcing(Model& model, std::vector<ScalarField> forcing);

/// Per-block L2 projection of scalar fields onto A^0.
Cochain project_scalars(const Complex& complex, const std::vector<ScalarField>& fields);

/// Whether a parent cell belongs to cover set `set` (the indicator chi_set).
bool in_set(const Cover& cover, int set, Index parent_cell);

/// L2 distance (sum_i ||a_i - exact_i||^2_{U_i})^{1/2}, after shifting the exact
/// solution by its weighted projection onto the harmonic basis (the same
/// normalization the solver imposes).
double l2_error(const Complex& complex, const HarmonicBasis& harmonic, const Cochain& alpha,
                const std::vector<ScalarField>& exact);

struct ExchangeBalance {
    std::vector<double> exchange;  // discrete int sum_j w_ij (a_i - a_j) per set
    std::vector<double> source;    // int of the (projected) source per set
    double max_mismatch() const;
};

/// Tests the discrete equations with the indicator of each block.
ExchangeBalance exchange_balance(const Model& model, const HodgeSolution& solution);

/// Neumann solve of a single set on its own, with the set's weight and
/// forcing; the solution has zero mean on the set.
Cochain single_domain_solve(const Model& model, int set);

/// Number of stored nonzeros of the stiffness block coupling sets i and j.
Index coupling_nonzeros(const Model& model, int i, int j);

/// Per-set values at the vertices (parent numbering) of a degree-0 cochain.
struct VertexValue {
    int set;
    Index vertex;
    Point x;
    double value;
};
std::vector<VertexValue> vertex_values(const Complex& complex, const Cochain& alpha);

}  // namespace cdr::models
