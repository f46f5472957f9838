#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace logcurves::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitEmptyInput = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitProvider = 3;
inline constexpr int kExitFailure = 4;

// Runs the command line `args` (without the program name). Regular output
// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace logcurves::cli
