#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace adjopinf::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kNumericalError = 2 };

/// Runs the command line with args[0] as the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace adjopinf::cli
