#pragma once

// Command-line front end. Exit codes: 0 success, 2 invalid configuration or
// arguments, 3 failure while running.

#include <iosfwd>
#include <string>
#include <vector>

namespace snntrain::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace snntrain::cli
