#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace skelimg {

inline constexpr const char* k_version = "0.1.0";

// Exit codes of the command-line tool.
enum ExitCode : int {
   exit_ok = 0,
   exit_io = 1,
   exit_validation = 2,
   exit_divergence = 3,
   exit_check_failed = 4,
};

// Runs the command line `args` (without the program name) and returns the
// process exit code. Normal output goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace skelimg
