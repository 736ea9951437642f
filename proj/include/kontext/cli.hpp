// `kontext` command line.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kontext::cli {

enum ExitCode : int {
  kOk = 0,
  kNotFound = 1,
  kUsage = 2,
  kDataError = 3,
  kExecFailed = 4,
};

/// Runs one invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Location of the preload library: $KONTEXT_SHIM, else next to the running
/// executable, else ../lib relative to it.
std::string shim_library_path();

}  // namespace kontext::cli
