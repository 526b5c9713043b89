#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vsr::cli {

enum ExitCode : int {
  kOk = 0,
  kViolation = 1,
  kInconclusive = 2,
  kConfigError = 64,
  kInternalError = 70,
};

/// Runs one subcommand; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vsr::cli
