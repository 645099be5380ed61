#ifndef MDOOD_CLI_HPP
#define MDOOD_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace mdood::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kNumericalError = 3,
};

/// Runs the command line `args` (program name first). Normal output goes to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mdood::cli

#endif  // MDOOD_CLI_HPP
