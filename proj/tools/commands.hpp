#pragma once

#include <string>
#include <vector>

namespace saltplan::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kHardViolations = 1,
  kUsage = 2,
  kBadInput = 3,
  kUnreachable = 4,
  kMismatch = 5,
  kInternal = 70,
};

/// Parses `args` (without the program name) and runs one subcommand.
int run(const std::vector<std::string>& args);

}  // namespace saltplan::cli
