#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ctm::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInputError = 1,
  kAssumptionViolation = 2,
  kPartialTransfer = 3,
};

// Runs one command line (without the program name). Reports go to `out`,
// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ctm::cli
