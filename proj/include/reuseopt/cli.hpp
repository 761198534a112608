#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace reuseopt {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,      // I/O, validation and evaluator errors
  kExitParse = 2,        // bad arguments or unparsable input documents
  kExitInfeasible = 3,   // no assignment meets the latency budget
  kExitMissingModel = 4,
  kExitBadModel = 5,     // corrupt model file or format version mismatch
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace reuseopt
