#pragma once

#include <exception>
#include <ostream>
#include <string>
#include <vector>

namespace salut::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

/// Maps an exception to the documented process exit code.
int exit_code_for(const std::exception& e) noexcept;

/// Runs the command line (args excludes the program name). Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv);

} // namespace salut::cli
