#pragma once

#include <ostream>

namespace twistor::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationFailure = 1,
  kUsage = 2,
  kNumericalFailure = 3,
};

/// Runs one twistor_kit command. Reports go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace twistor::cli
