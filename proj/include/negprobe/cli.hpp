#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace negprobe::cli {

enum ExitStatus : int {
  kSuccess = 0,
  kOperationalFailure = 1,
  kUsageError = 2,
};

// Entry point behind the negprobe executable. `args` excludes the program
// name. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace negprobe::cli
