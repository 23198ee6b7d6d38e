#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace econoforge::cli {

/// Exit codes of the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;  // parse, validation, infeasible, missing data
inline constexpr int kExitUsage = 2;

/// Runs one invocation. `args` excludes the program name. Everything the
/// command prints goes to `out` / `err`; `serve` blocks until SIGINT/SIGTERM.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace econoforge::cli
