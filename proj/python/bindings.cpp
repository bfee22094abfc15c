// pybind11 front end. A Scenario is built from the same JSON text the CLI
// reads; operators come back as dense numpy arrays, which is fine for the
// small problems one inspects interactively.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>
#include <sstream>

#include "cdr/cli.hpp"
#include "cdr/config.hpp"
#include "cdr/version.hpp"

namespace py = pybind11;
using namespace cdr;

namespace {

class PyScenario {
public:
    explicit PyScenario(const std::string& json) : doc_(config::parse(json)), sc_(config::build(doc_.root)) {}

    const Complex& complex() const { return *sc_.model.complex; }
    const WeightSet& weights() const { return sc_.model.weights; }

    int checked_degree(int k) const {
        if (k < 0 || k > complex().max_degree()) {
            throw py::value_error("degree must lie in [0, " + std::to_string(complex().max_degree()) + "]");
        }
        return k;
    }

    py::dict solve(int k, std::uint64_t seed) const {
        HodgeProblem problem = sc_.model.problem();
        problem.degree = checked_degree(k);
        if (k > 0) {
            std::mt19937_64 rng(seed);
            problem.source = complex().random(k, rng);
        }
        const HodgeSolution s = k == 0 ? solve_primal_k0(problem) : solve_mixed(problem);
        py::dict out;
        out["alpha"] = Vector(s.alpha.values());
        out["source"] = Vector(problem.source.values());
        out["system_residual"] = s.system_residual;
        out["laplacian_residual"] = s.laplacian_residual;
        out["harmonic_dim"] = s.kernel_dim;
        out["source_projected"] = s.source_projected;
        if (k == 0 && !sc_.exact.empty()) {
            const HarmonicBasis h = harmonic_basis(complex(), 0, weights(), sc_.model.allow_degenerate);
            out["l2_error"] = models::l2_error(complex(), h, s.alpha, sc_.exact);
        }
        return out;
    }

    py::dict decompose(int k, std::uint64_t seed) const {
        std::mt19937_64 rng(seed);
        const Cochain omega = complex().random(checked_degree(k), rng);
        const HodgeDecomposition d = hodge_decompose(complex(), k, weights(), omega);
        py::dict out;
        out["omega"] = Vector(omega.values());
        out["exact"] = Vector(d.exact.values());
        out["harmonic"] = Vector(d.harmonic.values());
        out["coexact"] = Vector(d.coexact.values());
        return out;
    }

    config::Document doc_;
    config::Scenario sc_;
};

}  // namespace

PYBIND11_MODULE(_cdr, m) {
    m.doc() = "Hodge-Laplace problems on the Cech-de Rham complex of a cover";
    m.attr("__version__") = CDR_VERSION;

    // Configuration mistakes surface as ValueError.
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const std::invalid_argument& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def("config_hash", [](const std::string& json) { return config::parse(json).hash; },
          "FNV-1a hash of the canonical JSON text, as written in output headers.");

    m.def(
        "run",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = cli::run(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command-line tool in-process; returns (exit_code, stdout, stderr).");

    py::class_<PyScenario>(m, "Scenario")
        .def(py::init<const std::string&>(), py::arg("json"))
        .def_property_readonly("preset", [](const PyScenario& s) { return s.sc_.preset; })
        .def_property_readonly("hash", [](const PyScenario& s) { return s.doc_.hash; })
        .def_property_readonly("h", [](const PyScenario& s) { return s.sc_.h; })
        .def_property_readonly("dim", [](const PyScenario& s) { return s.complex().dim(); })
        .def_property_readonly("num_sets", [](const PyScenario& s) { return s.complex().cover().num_sets(); })
        .def_property_readonly("max_degree", [](const PyScenario& s) { return s.complex().max_degree(); })
        .def("size", [](const PyScenario& s, int k) { return s.complex().layout(s.checked_degree(k))->size(); })
        .def("total_derivative",
             [](const PyScenario& s, int k) { return DenseMatrix(s.complex().total_derivative(s.checked_degree(k)).matrix); })
        .def("mass_matrix",
             [](const PyScenario& s, int k) {
                 const int d = s.checked_degree(k);
                 return DenseMatrix(s.complex().mass_matrix(d, s.weights().at(d), s.sc_.model.allow_degenerate).matrix);
             })
        .def("cohomology", [](const PyScenario& s) { return cohomology_dims(s.complex()); })
        .def("harmonic_basis",
             [](const PyScenario& s, int k) {
                 return harmonic_basis(s.complex(), s.checked_degree(k), s.weights(), s.sc_.model.allow_degenerate).vectors;
             })
        .def("poincare_constant",
             [](const PyScenario& s, int k) { return poincare_constant(s.complex(), s.checked_degree(k), s.weights()); })
        .def("solve", &PyScenario::solve, py::arg("degree") = 0, py::arg("seed") = 0)
        .def("decompose", &PyScenario::decompose, py::arg("degree"), py::arg("seed") = 0);
}
