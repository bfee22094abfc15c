#include "cdr/config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace cdr::config {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ConfigError(where + ": " + what); }

std::vector<double> numbers(const Json& value, const std::string& where) {
    if (!value.is_array()) {
        fail(where, "expected an array of numbers");
    }
    std::vector<double> out;
    for (const auto& v : value) {
        if (!v.is_number()) {
            fail(where, "expected an array of numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<double> numbers(const Json& obj, const std::string& key, std::vector<double> fallback,
                            const std::string& where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    return numbers(obj.at(key), where + "." + key);
}

DenseMatrix matrix(const Json& value, Index n, const std::string& where) {
    if (!value.is_array() || static_cast<Index>(value.size()) != n) {
        fail(where, "expected an " + std::to_string(n) + " x " + std::to_string(n) + " array");
    }
    DenseMatrix m(n, n);
    for (Index i = 0; i < n; ++i) {
        const auto row = numbers(value[static_cast<std::size_t>(i)], where);
        if (static_cast<Index>(row.size()) != n) {
            fail(where, "expected an " + std::to_string(n) + " x " + std::to_string(n) + " array");
        }
        for (Index j = 0; j < n; ++j) {
            m(i, j) = row[static_cast<std::size_t>(j)];
        }
    }
    return m;
}

DenseMatrix default_exchange(Index n) {
    DenseMatrix m = DenseMatrix::Ones(n, n);
    m.diagonal().setZero();
    return m;
}

std::vector<Index> all_cells(const Mesh& mesh) {
    std::vector<Index> out(static_cast<std::size_t>(mesh.num_cells()));
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        out[static_cast<std::size_t>(c)] = c;
    }
    return out;
}

// Weights of the generic presets: {"sets": [...], "exchange": [[...]]}.
models::Model generic_model(const std::string& name, const Json& root, CoverPtr cover) {
    const Json& w = section(root, "weights");
    const auto n = static_cast<std::size_t>(cover->num_sets());
    const auto sets = numbers(w, "sets", std::vector<double>(n, 1.0), "weights");
    if (sets.size() != n) {
        fail("weights.sets", "expected one weight per cover set (" + std::to_string(n) + ")");
    }
    const DenseMatrix ex = w.contains("exchange") ? matrix(w.at("exchange"), static_cast<Index>(n), "weights.exchange")
                                                  : default_exchange(static_cast<Index>(n));
    std::vector<models::ScalarField> zero(n, models::constant_field(0.0));
    return models::build_model(name, std::move(cover), sets, ex, std::move(zero));
}

bool inside_box(const Point& p, const std::vector<double>& box) {
    if (box.size() == 2) {
        return p.x() > box[0] && p.x() < box[1];
    }
    return p.x() > box[0] && p.x() < box[2] && p.y() > box[1] && p.y() < box[3];
}

// One cover set from a predicate description on cell centers.
std::vector<Index> cells_of(const Mesh& mesh, const Json& desc, const std::string& where) {
    if (desc.is_string() && desc.get<std::string>() == "all") {
        return all_cells(mesh);
    }
    if (!desc.is_object()) {
        fail(where, "expected an object such as {\"box\": [...]}");
    }
    if (desc.contains("all")) {
        return all_cells(mesh);
    }
    if (desc.contains("interval") || desc.contains("box")) {
        const std::string key = desc.contains("interval") ? "interval" : "box";
        const auto box = numbers(desc.at(key), where + "." + key);
        if (box.size() != 2 && box.size() != 4) {
            fail(where + "." + key, "expected [min, max] or [xmin, ymin, xmax, ymax]");
        }
        return select_cells(mesh, [&](const Point& p) { return inside_box(p, box); });
    }
    if (desc.contains("disk")) {
        const Json& d = desc.at("disk");
        const auto c = numbers(d, "center", {}, where + ".disk");
        const double r = number(d, "radius", 0.0, where + ".disk");
        if (c.size() != 2 || r <= 0.0) {
            fail(where + ".disk", "expected {\"center\": [x, y], \"radius\": r > 0}");
        }
        const Point center(c[0], c[1]);
        return select_cells(mesh, [&](const Point& p) { return (p - center).norm() < r; });
    }
    fail(where, "unknown set description; use all, interval, box or disk");
}

MeshPtr custom_mesh(const Json& root, std::optional<Index> resolution, double& h) {
    const Json& m = section(root, "mesh");
    const Index dim = integer(m, "dim", 1, "mesh");
    const Index res = resolution ? *resolution : integer(m, "resolution", 8, "mesh");
    if (res < 1) {
        fail("mesh.resolution", "must be at least 1");
    }
    if (dim == 1) {
        const auto ext = numbers(m, "extents", {0.0, 1.0}, "mesh");
        if (ext.size() != 2 || !(ext[0] < ext[1])) {
            fail("mesh.extents", "expected [a, b] with a < b");
        }
        h = (ext[1] - ext[0]) / static_cast<double>(res);
        return build_interval_mesh(ext[0], ext[1], res);
    }
    if (dim != 2) {
        fail("mesh.dim", "must be 1 or 2");
    }
    const auto ext = numbers(m, "extents", {0.0, 0.0, 1.0, 1.0}, "mesh");
    if (ext.size() != 4 || !(ext[0] < ext[2]) || !(ext[1] < ext[3])) {
        fail("mesh.extents", "expected [x0, y0, x1, y1] with x0 < x1 and y0 < y1");
    }
    std::vector<std::vector<double>> holes;
    if (m.contains("holes")) {
        if (!m.at("holes").is_array()) {
            fail("mesh.holes", "expected an array of boxes");
        }
        for (const auto& hole : m.at("holes")) {
            holes.push_back(numbers(hole, "mesh.holes"));
            if (holes.back().size() != 4) {
                fail("mesh.holes", "each hole is [x0, y0, x1, y1]");
            }
        }
    }
    h = (ext[2] - ext[0]) / static_cast<double>(res);
    const Index ny = std::max<Index>(1, static_cast<Index>(std::lround(res * (ext[3] - ext[1]) / (ext[2] - ext[0]))));
    return build_triangle_mesh(ext[0], ext[1], ext[2], ext[3], res, ny, [&](const Point& p) {
        for (const auto& hole : holes) {
            if (inside_box(p, hole)) {
                return false;
            }
        }
        return true;
    });
}

// Square [0,3]^2 minus its centre block, covered by three overlapping
// L-shaped arcs of the ring; pairwise overlaps are corner blocks.
CoverPtr hole_cover(Index per_unit, double& h) {
    auto mesh = build_triangle_mesh(0.0, 0.0, 3.0, 3.0, 3 * per_unit, 3 * per_unit, [](const Point& p) {
        return !(p.x() > 1.0 && p.x() < 2.0 && p.y() > 1.0 && p.y() < 2.0);
    });
    h = 1.0 / static_cast<double>(per_unit);
    // Ring blocks counter-clockwise from the bottom-left corner.
    auto block = [](const Point& p) {
        const int i = static_cast<int>(std::floor(p.x()));
        const int j = static_cast<int>(std::floor(p.y()));
        if (j == 0) {
            return i;  // 0, 1, 2
        }
        if (j == 1) {
            return i == 2 ? 3 : 7;
        }
        return i == 2 ? 4 : (i == 1 ? 5 : 6);
    };
    std::vector<std::vector<Index>> sets(3);
    for (Index c = 0; c < mesh->num_cells(); ++c) {
        const int b = block(mesh->barycenter(2, c));
        if (b <= 3) {
            sets[0].push_back(c);
        }
        if (b >= 3 && b <= 6) {
            sets[1].push_back(c);
        }
        if (b >= 6 || b == 0) {
            sets[2].push_back(c);
        }
    }
    return build_cover(mesh, sets);
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << hash;
    return out.str();
}

Document parse(const std::string& content, const std::string& origin) {
    Document doc;
    try {
        doc.root = Json::parse(content);
    } catch (const Json::parse_error& e) {
        // Byte offset -> line/column of the offending character.
        const std::size_t upto = std::min(e.byte > 0 ? e.byte - 1 : 0, content.size());
        std::size_t line = 1;
        std::size_t col = 1;
        for (std::size_t i = 0; i < upto; ++i) {
            if (content[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        // Drop nlohmann's own "[json.exception...] parse error at line L, column C: " prefix.
        std::string what = e.what();
        const auto at = what.find("column ");
        const auto colon = at == std::string::npos ? std::string::npos : what.find(": ", at);
        std::ostringstream msg;
        msg << origin << ":" << line << ":" << col << ": " << (colon == std::string::npos ? what : what.substr(colon + 2));
        throw ConfigError(msg.str());
    }
    if (!doc.root.is_object()) {
        throw ConfigError(origin + ":1:1: the configuration must be a JSON object");
    }
    doc.hash = fnv1a_hex(doc.root.dump());
    return doc;
}

Document load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(path + ": cannot open configuration file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

const Json& section(const Json& root, const std::string& key) {
    static const Json empty = Json::object();
    if (!root.contains(key)) {
        return empty;
    }
    const Json& s = root.at(key);
    if (!s.is_object()) {
        fail(key, "expected an object");
    }
    return s;
}

double number(const Json& obj, const std::string& key, double fallback, const std::string& where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const Json& v = obj.at(key);
    if (!v.is_number()) {
        fail(where + "." + key, "expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        fail(where + "." + key, "must be finite");
    }
    return d;
}

Index integer(const Json& obj, const std::string& key, Index fallback, const std::string& where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const Json& v = obj.at(key);
    if (!v.is_number_integer()) {
        fail(where + "." + key, "expected an integer");
    }
    return v.get<Index>();
}

std::string text(const Json& obj, const std::string& key, const std::string& fallback, const std::string& where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const Json& v = obj.at(key);
    if (!v.is_string()) {
        fail(where + "." + key, "expected a string");
    }
    return v.get<std::string>();
}

std::vector<models::ScalarField> fields_from(const Json& list, const CoverPtr& cover, const std::string& where,
                                             bool allow_time, double time) {
    const int n = cover->num_sets();
    if (!list.is_array() || static_cast<int>(list.size()) != n) {
        fail(where, "expected an array with one expression per cover set (" + std::to_string(n) + ")");
    }
    std::vector<models::ScalarField> out;
    for (int i = 0; i < n; ++i) {
        const Json& item = list[static_cast<std::size_t>(i)];
        std::string src;
        if (item.is_string()) {
            src = item.get<std::string>();
        } else if (item.is_number()) {
            std::ostringstream s;
            s << std::setprecision(17) << item.get<double>();
            src = s.str();
        } else {
            fail(where + "[" + std::to_string(i) + "]", "expected an expression string");
        }
        Expression expr;
        try {
            expr = Expression(src, n);
        } catch (const ExpressionError& e) {
            fail(where + "[" + std::to_string(i) + "]", e.what());
        }
        if (expr.uses_time() && !allow_time) {
            fail(where + "[" + std::to_string(i) + "]", "the variable t is not available here");
        }
        out.push_back([expr, cover, n, time](const Point& x, Index cell) {
            ExpressionVariables v;
            v.x = x.x();
            v.y = x.y();
            v.t = time;
            if (expr.uses_indicators()) {
                v.chi.resize(static_cast<std::size_t>(n));
                for (int s = 0; s < n; ++s) {
                    v.chi[static_cast<std::size_t>(s)] = models::in_set(*cover, s, cell) ? 1.0 : 0.0;
                }
            }
            return expr(v);
        });
    }
    return out;
}

Index configured_resolution(const Json& root) {
    const std::string preset = text(root, "preset", "custom", "config");
    const Json& m = section(root, "model");
    const Json& mesh = section(root, "mesh");
    if (preset == "rods") {
        return integer(m, "cells_per_unit", 16, "model");
    }
    if (preset == "multicontinuum") {
        return integer(m, "resolution", 8, "model");
    }
    if (preset == "inclusion") {
        return integer(m, "resolution", 16, "model");
    }
    if (preset == "hole") {
        return integer(mesh, "resolution", 2, "mesh");
    }
    if (preset == "interval" || preset == "square") {
        return integer(mesh, "resolution", 10, "mesh");
    }
    return integer(mesh, "resolution", 8, "mesh");
}

Scenario build(const Json& root, std::optional<Index> resolution) {
    Scenario sc;
    sc.preset = text(root, "preset", "custom", "config");
    sc.resolution = resolution ? *resolution : configured_resolution(root);
    if (sc.resolution < 1) {
        fail("resolution", "must be at least 1");
    }
    const Json& m = section(root, "model");
    const Index res = sc.resolution;

    if (sc.preset == "rods") {
        models::RodsConfig c;
        c.epsilon = number(m, "epsilon", c.epsilon, "model");
        c.cells_per_unit = res;
        c.w0 = number(m, "w0", c.w0, "model");
        c.w1 = number(m, "w1", c.w1, "model");
        c.w01 = number(m, "w01", c.w01, "model");
        sc.model = models::build_rods(c);
        sc.h = 1.0 / static_cast<double>(res);
    } else if (sc.preset == "multicontinuum") {
        models::MultiContinuumConfig c;
        c.continua = static_cast<int>(integer(m, "continua", 2, "model"));
        if (c.continua < 2) {
            fail("model.continua", "at least two continua required");
        }
        const auto n = static_cast<std::size_t>(c.continua);
        c.resolution = res;
        c.permeability = numbers(m, "permeability", std::vector<double>(n, 1.0), "model");
        if (c.permeability.size() != n) {
            fail("model.permeability", "expected one value per continuum");
        }
        c.exchange = m.contains("exchange") ? matrix(m.at("exchange"), c.continua, "model.exchange")
                                            : default_exchange(c.continua);
        c.forcing.assign(n, models::constant_field(0.0));
        if (m.contains("compressible") && !m.at("compressible").is_boolean()) {
            fail("model.compressible", "expected true or false");
        }
        c.compressible = m.value("compressible", false);
        sc.model = models::build_multicontinuum(c);
        sc.h = 1.0 / static_cast<double>(res);
    } else if (sc.preset == "inclusion") {
        models::InclusionConfig c;
        const auto box = numbers(m, "box", {c.x0, c.y0, c.x1, c.y1}, "model");
        if (box.size() != 4) {
            fail("model.box", "expected [x0, y0, x1, y1]");
        }
        c.x0 = box[0];
        c.y0 = box[1];
        c.x1 = box[2];
        c.y1 = box[3];
        c.resolution = res;
        const auto center = numbers(m, "center", {c.center.x(), c.center.y()}, "model");
        if (center.size() != 2) {
            fail("model.center", "expected [x, y]");
        }
        c.center = Point(center[0], center[1]);
        c.radius = number(m, "radius", c.radius, "model");
        c.w0 = number(m, "w0", c.w0, "model");
        c.w1 = number(m, "w1", c.w1, "model");
        c.w01 = number(m, "w01", c.w01, "model");
        sc.model = models::build_inclusion(c);
        sc.h = (c.x1 - c.x0) / static_cast<double>(res);
    } else if (sc.preset == "interval") {
        auto mesh = build_interval_mesh(0.0, 1.0, res);
        auto u0 = select_cells(*mesh, [](const Point& p) { return p.x() < 0.6; });
        auto u1 = select_cells(*mesh, [](const Point& p) { return p.x() > 0.4; });
        sc.model = generic_model("interval", root, build_cover(mesh, {u0, u1}));
        sc.h = 1.0 / static_cast<double>(res);
    } else if (sc.preset == "square") {
        auto mesh = build_triangle_mesh(0.0, 0.0, 1.0, 1.0, res, res);
        auto u0 = select_cells(*mesh, [](const Point& p) { return p.x() < 0.6; });
        auto u1 = select_cells(*mesh, [](const Point& p) { return p.x() > 0.4; });
        sc.model = generic_model("square", root, build_cover(mesh, {u0, u1}));
        sc.h = 1.0 / static_cast<double>(res);
    } else if (sc.preset == "hole") {
        sc.model = generic_model("hole", root, hole_cover(res, sc.h));
    } else if (sc.preset == "custom") {
        MeshPtr mesh = custom_mesh(root, resolution, sc.h);
        const Json& cover = section(root, "cover");
        if (!cover.contains("sets") || !cover.at("sets").is_array() || cover.at("sets").empty()) {
            fail("cover.sets", "expected a nonempty array of set descriptions");
        }
        std::vector<std::vector<Index>> sets;
        for (std::size_t i = 0; i < cover.at("sets").size(); ++i) {
            sets.push_back(cells_of(*mesh, cover.at("sets")[i], "cover.sets[" + std::to_string(i) + "]"));
            if (sets.back().empty()) {
                fail("cover.sets[" + std::to_string(i) + "]", "selects no cells");
            }
        }
        try {
            sc.model = generic_model("custom", root, build_cover(mesh, sets));
        } catch (const NotACoverError& e) {
            fail("cover.sets", e.what());
        }
    } else {
        fail("preset", "unknown preset '" + sc.preset +
                           "' (expected rods, multicontinuum, inclusion, interval, square, hole or custom)");
    }

    const CoverPtr& cover = sc.model.complex->cover_ptr();
    const Json& source = section(root, "source");
    if (source.contains("f")) {
        models::set_forcing(sc.model, fields_from(source.at("f"), cover, "source.f"));
    }
    if (root.contains("exact")) {
        sc.exact = fields_from(root.at("exact"), cover, "exact");
    }
    return sc;
}

}  // namespace cdr::config
