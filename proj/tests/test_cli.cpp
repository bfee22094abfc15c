#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cdr/cli.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = CDR_CONFIG_DIR;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cdr_run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cdr::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("cdr_cli_test_" + name);
    fs::remove_all(dir);
    return dir;
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path path = fs::temp_directory_path() / ("cdr_cli_test_" + name + ".json");
    std::ofstream(path) << text;
    return path;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const fs::path& path) {
    std::vector<std::string> out;
    std::ifstream in(path);
    for (std::string line; std::getline(in, line);) {
        out.push_back(line);
    }
    return out;
}

}  // namespace

TEST_CASE("cli: cohomology of the interval") {
    const fs::path out = scratch("cohomology");
    const auto r = cdr_run({"cohomology", "--config", (kConfigs / "interval.json").string(), "--out", out.string()});
    REQUIRE(r.code == cdr::cli::kExitOk);
    CHECK(r.out.find(R"("k0":1)") != std::string::npos);
    CHECK(r.out.find(R"("k1":0)") != std::string::npos);
    const auto csv = lines(out / "cohomology.csv");
    REQUIRE(csv.size() >= 3);
    CHECK(csv[0].rfind("# cdr ", 0) == 0);
    CHECK(csv[0].find("config_hash=") != std::string::npos);
    CHECK(csv[1] == "k,dimension,harmonic_dim");
    CHECK(csv[2] == "0,1,1");
    const auto json = nlohmann::json::parse(slurp(out / "cohomology.json"));
    CHECK(json.at("agree") == true);
    CHECK(json.at("provenance").at("command") == "cohomology");
}

TEST_CASE("cli: the hole has one-dimensional first cohomology") {
    const fs::path out = scratch("hole");
    const auto r = cdr_run({"cohomology", "--config", (kConfigs / "hole.json").string(), "--out", out.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find(R"("k1":1)") != std::string::npos);
}

TEST_CASE("cli: outputs are byte-identical across runs") {
    for (const char* cmd : {"solve", "decompose", "transient"}) {
        CAPTURE(cmd);
        const std::string config =
            std::string(cmd) == "transient" ? "heat.json" : std::string(cmd) == "decompose" ? "hole.json" : "interval.json";
        const fs::path a = scratch(std::string("det_a_") + cmd);
        const fs::path b = scratch(std::string("det_b_") + cmd);
        REQUIRE(cdr_run({cmd, "--config", (kConfigs / config).string(), "--out", a.string()}).code == 0);
        REQUIRE(cdr_run({cmd, "--config", (kConfigs / config).string(), "--out", b.string()}).code == 0);
        int files = 0;
        for (const auto& entry : fs::directory_iterator(a)) {
            const fs::path other = b / entry.path().filename();
            REQUIRE(fs::exists(other));
            CHECK(slurp(entry.path()) == slurp(other));
            ++files;
        }
        CHECK(files >= 2);
    }
}

TEST_CASE("cli: convergence table leaves the first rate empty") {
    const fs::path out = scratch("convergence");
    const auto r = cdr_run({"convergence", "--config", (kConfigs / "rods_manufactured.json").string(), "--out", out.string()});
    REQUIRE(r.code == 0);
    const auto csv = lines(out / "convergence.csv");
    REQUIRE(csv.size() == 2 + 3);
    CHECK(csv[1] == "h,error,rate");
    CHECK(csv[2].back() == ',');
    for (std::size_t i = 3; i < csv.size(); ++i) {
        const double rate = std::stod(csv[i].substr(csv[i].rfind(',') + 1));
        CHECK(rate > 1.8);
        CHECK(rate < 2.2);
    }
}

TEST_CASE("cli: solve diagnostics") {
    const fs::path out = scratch("solve");
    REQUIRE(cdr_run({"solve", "--config", (kConfigs / "rods_manufactured.json").string(), "--out", out.string()}).code == 0);
    const auto diag = nlohmann::json::parse(slurp(out / "diagnostics.json"));
    CHECK(diag.at("harmonic_dim") == 1);
    CHECK(diag.at("provenance").at("config_hash").get<std::string>().size() == 16);
    CHECK(diag.contains("exchange_balance"));
    CHECK(diag.at("l2_error").get<double>() < 5e-2);
    const auto csv = lines(out / "solution.csv");
    CHECK(csv[1].rfind("block,p,q,patch,entity,x,y,", 0) == 0);
}

TEST_CASE("cli: exit codes") {
    const fs::path out = scratch("errors");
    const std::string interval = (kConfigs / "interval.json").string();
    CHECK(cdr_run({}).code == cdr::cli::kExitConfig);
    CHECK(cdr_run({"solve"}).code == cdr::cli::kExitConfig);
    CHECK(cdr_run({"bogus", "--config", interval}).code == cdr::cli::kExitConfig);
    CHECK(cdr_run({"--help"}).code == cdr::cli::kExitOk);
    CHECK(cdr_run({"solve", "--config", "/nonexistent.json", "--out", out.string()}).code == cdr::cli::kExitConfig);

    const std::pair<const char*, const char*> config_errors[] = {
        {"malformed", "{\"preset\": \"rods\",}"},
        {"epsilon", R"({"preset": "rods", "model": {"epsilon": 1.5}})"},
        {"section", R"({"preset": "rods", "solver_options": {}})"},
        {"order", R"({"preset": "rods", "transient": {"order": 3}})"},
        {"time", R"({"preset": "rods", "source": {"f": ["t", "0"]}})"},
        {"incompressible", R"({"preset": "multicontinuum", "transient": {"order": 1}})"},
    };
    for (const auto& [name, text] : config_errors) {
        CAPTURE(name);
        const std::string command =
            std::string(name) == "order" || std::string(name) == "incompressible" ? "transient" : "solve";
        const auto r = cdr_run({command, "--config", write_config(name, text).string(), "--out", out.string()});
        CHECK(r.code == cdr::cli::kExitConfig);
        CHECK(r.err.rfind("cdr: config error: ", 0) == 0);
    }
    const auto missing_exact =
        cdr_run({"convergence", "--config", write_config("noexact", R"({"preset": "rods"})").string(), "--out", out.string()});
    CHECK(missing_exact.code == cdr::cli::kExitConfig);

    const auto negative = cdr_run({"solve", "--config",
                                   write_config("tol", R"({"preset": "rods", "solver": {"residual_tolerance": -1}})").string(),
                                   "--out", out.string()});
    CHECK(negative.code == cdr::cli::kExitConfig);
    // A residual above the requested tolerance is a solver failure.
    const auto strict = cdr_run(
        {"solve", "--config",
         write_config("strict", R"({"preset": "rods", "source": {"f": ["x", "1"]}, "solver": {"residual_tolerance": 1e-300}})")
             .string(),
         "--out", out.string()});
    CHECK(strict.code == cdr::cli::kExitSolver);
    CHECK(strict.err.rfind("cdr: solver error: ", 0) == 0);
}

TEST_CASE("cli: transient energy log") {
    const fs::path out = scratch("wave");
    REQUIRE(cdr_run({"transient", "--config", (kConfigs / "wave.json").string(), "--out", out.string()}).code == 0);
    const auto csv = lines(out / "energy.csv");
    CHECK(csv[1] == "step,t,energy,norm_alpha,norm_Dalpha,norm_Dstar_alpha");
    const auto diag = nlohmann::json::parse(slurp(out / "diagnostics.json"));
    CHECK(diag.at("max_energy_drift").get<double>() <= 1e-9);
}
