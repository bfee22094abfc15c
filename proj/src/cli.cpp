#include "cdr/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "cdr/config.hpp"
#include "cdr/evolution.hpp"
#include "cdr/version.hpp"

namespace cdr::cli {

namespace {

namespace fs = std::filesystem;
using config::Json;
using config::ConfigError;

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ConfigError(where + ": " + what); }

class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shortest representation that round-trips.
std::string num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Output directory plus the provenance every artifact carries.
class Sink {
public:
    Sink(fs::path dir, std::string command, std::string hash)
        : dir_(std::move(dir)), command_(std::move(command)), hash_(std::move(hash)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) {
            fail("--out", "cannot create directory " + dir_.string() + ": " + ec.message());
        }
    }

    /// Opens a CSV and writes the provenance comment line plus the header.
    std::ofstream csv(const std::string& name, const std::string& header) const {
        std::ofstream f(dir_ / name, std::ios::binary);
        if (!f) {
            throw std::runtime_error("cannot write " + (dir_ / name).string());
        }
        f << "# cdr " << CDR_VERSION << " command=" << command_ << " config_hash=" << hash_ << "\n" << header << "\n";
        return f;
    }

    void json(const std::string& name, Json body) const {
        body["provenance"] = provenance();
        std::ofstream f(dir_ / name, std::ios::binary);
        if (!f) {
            throw std::runtime_error("cannot write " + (dir_ / name).string());
        }
        f << body.dump(2) << "\n";
    }

    Json provenance() const { return {{"version", CDR_VERSION}, {"command", command_}, {"config_hash", hash_}}; }

private:
    fs::path dir_;
    std::string command_;
    std::string hash_;
};

/// Rows block,p,q,patch,entity,x,y followed by one value per cochain.
void write_cochains(std::ostream& f, const Complex& complex, const std::vector<const Cochain*>& values) {
    const Cochain& first = *values.front();
    const BlockLayout& lay = first.layout();
    const Cover& cover = complex.cover();
    const Mesh& mesh = cover.mesh();
    for (std::size_t b = 0; b < lay.num_blocks(); ++b) {
        const BlockIndex& bi = lay.block(b);
        const Patch& patch = cover.patch(bi.patch());
        const auto& map = patch.submesh.dof_map(bi.q);
        for (Index i = 0; i < lay.block_size(b); ++i) {
            const Index parent = map[static_cast<std::size_t>(i)];
            const Point x = mesh.barycenter(bi.q, parent);
            f << b << ',' << bi.p << ',' << bi.q << ',' << patch.index.to_string() << ',' << parent << ','
              << num(x.x()) << ',' << num(mesh.dim() == 2 ? x.y() : 0.0);
            for (const Cochain* c : values) {
                f << ',' << num(c->values()(lay.offset(b) + i));
            }
            f << '\n';
        }
    }
}

const std::string kCochainHeader = "block,p,q,patch,entity,x,y";

struct Context {
    config::Document doc;
    Sink sink;
    std::ostream& out;
    const Json& root() const { return doc.root; }
};

int degree_of(const Json& sec, const std::string& where, const Complex& complex, int fallback = 0) {
    const Index k = config::integer(sec, "degree", fallback, where);
    if (k < 0 || k > complex.max_degree()) {
        fail(where + ".degree", "must lie in [0, " + std::to_string(complex.max_degree()) + "]");
    }
    return static_cast<int>(k);
}

std::uint64_t seed_of(const Json& sec, const std::string& where) {
    const Index s = config::integer(sec, "random_seed", 0, where);
    if (s < 0) {
        fail(where + ".random_seed", "must be nonnegative");
    }
    return static_cast<std::uint64_t>(s);
}

double residual_tolerance(const Json& root) {
    const double tol = config::number(config::section(root, "solver"), "residual_tolerance", 1e-8, "solver");
    if (!(tol > 0.0)) {
        fail("solver.residual_tolerance", "must be positive");
    }
    return tol;
}

Json solution_json(const HodgeSolution& s) {
    return {{"harmonic_dim", s.kernel_dim},
            {"system_residual", s.system_residual},
            {"laplacian_residual", s.laplacian_residual},
            {"harmonic_orthogonality", s.harmonic_orthogonality},
            {"harmonic_norm", s.harmonic_norm},
            {"source_projected", s.source_projected},
            {"warnings", s.warnings}};
}

void check_residual(const HodgeSolution& s, double tol) {
    if (!(s.system_residual <= tol)) {
        throw SolverFailure("solve residual " + num(s.system_residual) + " exceeds solver.residual_tolerance " +
                            num(tol));
    }
}

int cmd_solve(Context& ctx) {
    const Json& sec = config::section(ctx.root(), "solve");
    const double tol = residual_tolerance(ctx.root());
    config::Scenario sc = config::build(ctx.root());
    const models::Model& model = sc.model;
    const int k = degree_of(sec, "solve", *model.complex);

    HodgeProblem problem = model.problem();
    problem.degree = k;
    if (k > 0) {
        std::mt19937_64 rng(seed_of(sec, "solve"));
        problem.source = model.complex->random(k, rng);
    }
    const HodgeSolution sol = k == 0 ? solve_primal_k0(problem) : solve_mixed(problem);

    {
        auto f = ctx.sink.csv("solution.csv", kCochainHeader + ",value");
        write_cochains(f, *model.complex, {&sol.alpha});
    }
    Json diag = solution_json(sol);
    diag["preset"] = sc.preset;
    diag["degree"] = k;
    diag["unknowns"] = sol.alpha.size();
    if (k == 0) {
        const auto balance = models::exchange_balance(model, sol);
        diag["exchange_balance"] = {{"exchange", balance.exchange},
                                    {"source", balance.source},
                                    {"max_mismatch", balance.max_mismatch()}};
        if (!sc.exact.empty()) {
            const HarmonicBasis h = harmonic_basis(*model.complex, 0, model.weights, model.allow_degenerate);
            diag["l2_error"] = models::l2_error(*model.complex, h, sol.alpha, sc.exact);
        }
    }
    ctx.sink.json("diagnostics.json", diag);
    ctx.out << "solve: " << sol.alpha.size() << " unknowns, residual " << num(sol.system_residual)
            << ", harmonic_dim " << sol.kernel_dim << "\n";
    check_residual(sol, tol);
    return kExitOk;
}

int cmd_cohomology(Context& ctx) {
    config::Scenario sc = config::build(ctx.root());
    const Complex& complex = *sc.model.complex;
    const auto dims = cohomology_dims(complex);
    const WeightSet unit = WeightSet::unit(complex);

    Json dims_json = Json::object();
    Json harmonic_json = Json::object();
    auto f = ctx.sink.csv("cohomology.csv", "k,dimension,harmonic_dim");
    bool agree = true;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        const Index h = harmonic_basis(complex, static_cast<int>(k), unit).dimension();
        const std::string key = "k" + std::to_string(k);
        dims_json[key] = dims[k];
        harmonic_json[key] = h;
        agree = agree && h == dims[k];
        f << k << ',' << dims[k] << ',' << h << '\n';
    }
    ctx.sink.json("cohomology.json", {{"dims", dims_json}, {"harmonic_dims", harmonic_json}, {"agree", agree}});
    ctx.out << dims_json.dump() << "\n";
    if (!agree) {
        throw SolverFailure("harmonic dimensions disagree with the rank computation");
    }
    return kExitOk;
}

int cmd_decompose(Context& ctx) {
    const Json& sec = config::section(ctx.root(), "decompose");
    config::Scenario sc = config::build(ctx.root());
    const models::Model& model = sc.model;
    const Complex& complex = *model.complex;
    const int k = degree_of(sec, "decompose", complex);

    Cochain omega;
    if (k == 0 && config::text(sec, "input", "random", "decompose") == "source") {
        omega = model.source;
    } else {
        std::mt19937_64 rng(seed_of(sec, "decompose"));
        omega = complex.random(k, rng);
    }
    const HodgeDecomposer dec(complex, k, model.weights);
    const HodgeDecomposition parts = dec.decompose(omega);

    const SparseMatrix& m = dec.mass();
    const double n = norm(m, omega.values());
    const Vector rec = parts.exact.values() + parts.harmonic.values() + parts.coexact.values();
    const double scale = n > 0.0 ? n : 1.0;
    const double reconstruction = norm(m, omega.values() - rec) / scale;
    const double orth = std::max({std::abs(inner(m, parts.exact.values(), parts.harmonic.values())),
                                  std::abs(inner(m, parts.exact.values(), parts.coexact.values())),
                                  std::abs(inner(m, parts.harmonic.values(), parts.coexact.values()))}) /
                        (scale * scale);
    {
        auto f = ctx.sink.csv("decomposition.csv", kCochainHeader + ",omega,exact,harmonic,coexact");
        write_cochains(f, complex, {&omega, &parts.exact, &parts.harmonic, &parts.coexact});
    }
    ctx.sink.json("diagnostics.json", {{"preset", sc.preset},
                                       {"degree", k},
                                       {"harmonic_dim", dec.harmonic().dimension()},
                                       {"norm", n},
                                       {"norm_exact", norm(m, parts.exact.values())},
                                       {"norm_harmonic", norm(m, parts.harmonic.values())},
                                       {"norm_coexact", norm(m, parts.coexact.values())},
                                       {"reconstruction_error", reconstruction},
                                       {"max_orthogonality_defect", orth}});
    ctx.out << "decompose: degree " << k << ", reconstruction " << num(reconstruction) << ", orthogonality "
            << num(orth) << "\n";
    return kExitOk;
}

/// C_k for every degree where D^k does not vanish; null elsewhere.
Json poincare_row(const Complex& complex, const WeightSet& weights, std::ostream* csv, const std::string& prefix) {
    Json row = Json::object();
    for (int k = 0; k <= complex.max_degree(); ++k) {
        const std::string key = "k" + std::to_string(k);
        try {
            const double c = poincare_constant(complex, k, weights);
            row[key] = c;
            if (csv) {
                *csv << prefix << k << ',' << num(c) << '\n';
            }
        } catch (const std::domain_error&) {
            row[key] = nullptr;
        }
    }
    return row;
}

int cmd_poincare(Context& ctx) {
    const Json& sec = config::section(ctx.root(), "poincare");
    config::Scenario sc = config::build(ctx.root());
    Json body = {{"preset", sc.preset}};
    {
        auto f = ctx.sink.csv("poincare.csv", "k,constant");
        body["constants"] = poincare_row(*sc.model.complex, sc.model.weights, &f, "");
    }
    if (sec.contains("epsilons")) {
        if (sc.preset != "rods") {
            fail("poincare.epsilons", "the overlap sweep needs the rods preset");
        }
        const Json& eps = sec.at("epsilons");
        if (!eps.is_array() || eps.empty()) {
            fail("poincare.epsilons", "expected a nonempty array of numbers");
        }
        auto f = ctx.sink.csv("poincare_sweep.csv", "epsilon,k,constant");
        Json sweep = Json::array();
        for (const auto& e : eps) {
            if (!e.is_number()) {
                fail("poincare.epsilons", "expected a nonempty array of numbers");
            }
            Json root = ctx.root();
            root["model"]["epsilon"] = e;
            config::Scenario s = config::build(root);
            const double epsilon = e.get<double>();
            sweep.push_back({{"epsilon", epsilon},
                             {"constants", poincare_row(*s.model.complex, s.model.weights, &f, num(epsilon) + ",")}});
        }
        body["sweep"] = sweep;
    }
    ctx.sink.json("poincare.json", body);
    ctx.out << body["constants"].dump() << "\n";
    return kExitOk;
}

Cochain initial_cochain(const Json& sec, const std::string& key, const config::Scenario& sc, int k,
                        std::mt19937_64& rng, bool random_default) {
    const Complex& complex = *sc.model.complex;
    if (sec.contains(key)) {
        if (k != 0) {
            fail("transient." + key, "expressions are only available for degree 0; use random_seed");
        }
        return models::project_scalars(complex,
                                       config::fields_from(sec.at(key), complex.cover_ptr(), "transient." + key));
    }
    return random_default ? complex.random(k, rng) : complex.zero(k);
}

int cmd_transient(Context& ctx) {
    const Json& sec = config::section(ctx.root(), "transient");
    config::Scenario sc = config::build(ctx.root());
    const models::Model& model = sc.model;
    const Complex& complex = *model.complex;

    const Index order = config::integer(sec, "order", 1, "transient");
    if (order != 1 && order != 2) {
        fail("transient.order", "must be 1 (heat) or 2 (wave), got " + std::to_string(order));
    }
    if (!model.compressible) {
        fail("model.compressible", "the model is incompressible; set compressible to true to step in time");
    }
    if (sc.preset == "multicontinuum" && order != 1) {
        fail("transient.order", "the compressible multicontinuum model evolves by the heat flow (order 1)");
    }
    const double dt = config::number(sec, "dt", 0.01, "transient");
    if (!(dt > 0.0)) {
        fail("transient.dt", "must be positive");
    }
    const Index steps = config::integer(sec, "steps", 100, "transient");
    if (steps < 0) {
        fail("transient.steps", "must be nonnegative");
    }
    const int k = degree_of(sec, "transient", complex);
    std::mt19937_64 rng(seed_of(sec, "transient"));

    TransientState state;
    state.alpha = initial_cochain(sec, "initial", sc, k, rng, true);
    Cochain source = k == 0 ? model.source : complex.zero(k);
    if (!config::section(ctx.root(), "source").contains("f")) {
        source = complex.zero(k);
    }

    std::vector<EnergyRow> rows;
    if (order == 1) {
        const HeatStepper stepper(complex, k, model.weights, dt, model.allow_degenerate);
        rows = run(stepper, state, source, static_cast<int>(steps));
    } else {
        state.velocity = initial_cochain(sec, "velocity", sc, k, rng, false);
        const WaveStepper stepper(complex, k, model.weights, dt, model.allow_degenerate);
        rows = run(stepper, state, source, static_cast<int>(steps));
    }

    {
        auto f = ctx.sink.csv("energy.csv", "step,t,energy,norm_alpha,norm_Dalpha,norm_Dstar_alpha");
        for (std::size_t n = 0; n < rows.size(); ++n) {
            const EnergyRow& r = rows[n];
            f << n << ',' << num(r.t) << ',' << num(r.energy) << ',' << num(r.norm_alpha) << ',' << num(r.norm_d_alpha)
              << ',' << num(r.norm_d_star_alpha) << '\n';
        }
    }
    {
        auto f = ctx.sink.csv("state.csv", kCochainHeader + (order == 2 ? ",alpha,velocity" : ",alpha"));
        std::vector<const Cochain*> values{&state.alpha};
        if (order == 2) {
            values.push_back(&state.velocity);
        }
        write_cochains(f, complex, values);
    }
    double drift = 0.0;
    bool monotone = true;
    for (std::size_t n = 1; n < rows.size(); ++n) {
        drift = std::max(drift, std::abs(rows[n].energy - rows.front().energy));
        monotone = monotone && rows[n].norm_alpha <= rows[n - 1].norm_alpha * (1.0 + 1e-12);
    }
    ctx.sink.json("diagnostics.json", {{"preset", sc.preset},
                                       {"order", order},
                                       {"degree", k},
                                       {"dt", dt},
                                       {"steps", steps},
                                       {"final_time", rows.back().t},
                                       {"initial_energy", rows.front().energy},
                                       {"final_energy", rows.back().energy},
                                       {"max_energy_drift", drift},
                                       {"norm_nonincreasing", monotone}});
    ctx.out << "transient: " << steps << " steps of " << (order == 1 ? "heat" : "wave") << ", energy drift "
            << num(drift) << "\n";
    return kExitOk;
}

int cmd_convergence(Context& ctx) {
    const Json& sec = config::section(ctx.root(), "convergence");
    if (!ctx.root().contains("exact")) {
        fail("exact", "convergence needs a manufactured solution (\"exact\": [...])");
    }
    const double tol = residual_tolerance(ctx.root());
    const Index refinements = config::integer(sec, "refinements", 3, "convergence");
    if (refinements < 1 || refinements > 12) {
        fail("convergence.refinements", "must lie in [1, 12]");
    }
    const Index base =
        config::integer(sec, "base_resolution", config::configured_resolution(ctx.root()), "convergence");
    if (base < 1) {
        fail("convergence.base_resolution", "must be at least 1");
    }

    Json levels = Json::array();
    auto f = ctx.sink.csv("convergence.csv", "h,error,rate");
    double previous = 0.0;
    for (Index r = 0; r < refinements; ++r) {
        config::Scenario sc = config::build(ctx.root(), base << r);
        const models::Model& model = sc.model;
        const HodgeSolution sol = solve_primal_k0(model.problem());
        check_residual(sol, tol);
        const HarmonicBasis h = harmonic_basis(*model.complex, 0, model.weights, model.allow_degenerate);
        const double err = models::l2_error(*model.complex, h, sol.alpha, sc.exact);
        Json level = {{"h", sc.h}, {"error", err}, {"residual", sol.system_residual}};
        f << num(sc.h) << ',' << num(err) << ',';
        if (r > 0) {
            const double rate = std::log2(previous / err);
            level["rate"] = rate;
            f << num(rate);
        }
        f << '\n';
        levels.push_back(level);
        previous = err;
    }
    ctx.sink.json("diagnostics.json", {{"levels", levels}});
    ctx.out << "convergence: " << refinements << " levels, final error " << num(previous) << "\n";
    return kExitOk;
}

const std::vector<std::string> kTopLevelKeys{"preset", "description", "model",  "mesh",      "cover",
                                             "weights", "source",     "exact",  "solver",    "output",
                                             "solve",   "cohomology", "decompose", "poincare", "transient",
                                             "convergence"};

void check_keys(const Json& root) {
    for (const auto& [key, value] : root.items()) {
        if (std::find(kTopLevelKeys.begin(), kTopLevelKeys.end(), key) == kTopLevelKeys.end()) {
            fail(key, "unknown section");
        }
    }
}

int dispatch(const std::string& command, const std::string& config_path, std::string out_dir, std::ostream& out) {
    config::Document doc = config::load(config_path);
    check_keys(doc.root);
    if (out_dir.empty()) {
        out_dir = config::text(config::section(doc.root, "output"), "directory", "", "output");
        if (out_dir.empty()) {
            fail("--out", "no output directory (pass --out or set output.directory)");
        }
    }
    Sink sink(out_dir, command, doc.hash);
    Context ctx{std::move(doc), std::move(sink), out};
    if (command == "solve") {
        return cmd_solve(ctx);
    }
    if (command == "cohomology") {
        return cmd_cohomology(ctx);
    }
    if (command == "decompose") {
        return cmd_decompose(ctx);
    }
    if (command == "poincare") {
        return cmd_poincare(ctx);
    }
    if (command == "transient") {
        return cmd_transient(ctx);
    }
    return cmd_convergence(ctx);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cech-de Rham Hodge-Laplace solver", "cdr"};
    app.set_version_flag("--version", CDR_VERSION);
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"solve", "Solve the Hodge-Laplace problem of the configured model"},
        {"cohomology", "Report cohomology and harmonic-space dimensions"},
        {"decompose", "Weighted Hodge decomposition of a cochain"},
        {"poincare", "Poincare constants per degree, optionally over an overlap sweep"},
        {"transient", "Heat (order 1) or wave (order 2) time stepping"},
        {"convergence", "Manufactured-solution refinement study"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--out", out_dir, "Output directory");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << (dynamic_cast<const CLI::CallForHelp*>(&e) ? app.help() : std::string(CDR_VERSION)) << "\n";
            return kExitOk;
        }
        err << "cdr: " << e.what() << "\n";
        return kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        return dispatch(command, config_path, out_dir, out);
    } catch (const ExpressionError& e) {
        err << "cdr: config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "cdr: config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SizeLimitError& e) {
        err << "cdr: size limit: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        err << "cdr: solver error: " << e.what() << "\n";
        return kExitSolver;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run(args, std::cout, std::cerr);
}

}  // namespace cdr::cli
