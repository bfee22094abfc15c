#pragma once

// JSON run configuration. Turns a validated document into the configured
// model. See docs/config.md for the format.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdr/expression.hpp"
#include "cdr/models.hpp"

namespace cdr::config {

using Json = nlohmann::json;
using models::ConfigError;

struct Document {
    Json root;
    /// FNV-1a 64-bit hash of the canonical (sorted, compact) JSON text.
    std::string hash;
};

/// Reads and parses a file. Syntax errors are reported as
/// "<path>:<line>:<column>: ..." in a ConfigError.
Document load(const std::string& path);
Document parse(const std::string& text, const std::string& origin = "<config>");

std::string fnv1a_hex(const std::string& text);

/// A fully built scenario: model plus optional manufactured solution.
struct Scenario {
    std::string preset;
    models::Model model;
    std::vector<models::ScalarField> exact;  // empty unless "exact" is given
    Index resolution = 0;
    double h = 0.0;  // mesh size
};

/// Builds the configured model. `resolution` overrides the preset's
/// resolution knob (cells per unit length for rods, cells per side
/// otherwise); convergence studies use it for refinement.
Scenario build(const Json& root, std::optional<Index> resolution = std::nullopt);

/// Resolution the configuration asks for.
Index configured_resolution(const Json& root);

/// Compiles per-set expressions into fields that see the cover indicators.
std::vector<models::ScalarField> fields_from(const Json& list, const CoverPtr& cover, const std::string& where,
                                             bool allow_time = false, double time = 0.0);

/// Typed accessors raising ConfigError with the JSON path on mismatch.
double number(const Json& obj, const std::string& key, double fallback, const std::string& where);
Index integer(const Json& obj, const std::string& key, Index fallback, const std::string& where);
std::string text(const Json& obj, const std::string& key, const std::string& fallback, const std::string& where);
const Json& section(const Json& root, const std::string& key);

}  // namespace cdr::config
