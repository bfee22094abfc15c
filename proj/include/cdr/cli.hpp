#pragma once

// Configuration-driven front end shared by the `cdr` executable and tests.
//
//   cdr <command> --config <file.json> --out <dir>
//   commands: solve cohomology decompose poincare transient convergence
//
// Exit codes: 0 success, 1 configuration error, 2 solver error.

#include <iosfwd>
#include <string>
#include <vector>

namespace cdr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitSolver = 2;

/// `args` excludes the program name. Messages go to `err`, short summaries
/// to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace cdr::cli
