#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace samplation::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kNotApplicable = 3,
};

/// Runs one CLI invocation. argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace samplation::cli
