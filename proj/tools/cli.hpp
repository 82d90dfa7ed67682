#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sharpcal::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kInvariantViolation = 1,
  kParseError = 2,
  kNotCalibrated = 3,
  kNumericFailure = 4,
  kSearchFailure = 5,
};

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs the command line `args` (without the program name). Reports go to
/// --out files or `out`; summaries and diagnostics go to `out`/`err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sharpcal::cli
