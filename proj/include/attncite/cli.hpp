#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "attncite/error.hpp"

namespace attncite::cli {

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitMissingInput = 3;
inline constexpr int kExitModeMismatch = 4;

int exit_code(ErrorKind kind);

// Runs one subcommand. `args` excludes the program name. Failures are
// written to `err` as a single JSON line {"error": {...}}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace attncite::cli
