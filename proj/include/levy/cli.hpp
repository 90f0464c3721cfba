#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace levy {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNoConvergence = 3;

/// Runs one invocation. `args` excludes the program name.
/// Subcommands: price, table, curve, density, sample, mc, calibrate.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace levy
