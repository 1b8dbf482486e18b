#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace repgeo::app {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kInvalidInput = 2,
  kNotConverged = 3,
};

/// Default output root when a command is given no --out.
inline constexpr const char* kOutRootEnv = "REPGEO_OUT_ROOT";

/// Runs one command. `args` excludes the program name. Human-readable
/// progress goes to `out`, errors to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace repgeo::app
