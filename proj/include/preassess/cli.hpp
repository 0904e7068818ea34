#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace preassess {

/// Exit codes: 0 ok, 1 domain error, 2 usage error.
enum ExitCode : int { kExitOk = 0, kExitDomain = 1, kExitUsage = 2 };

/// Runs one CLI invocation; `args` excludes the program name. Results go to
/// `out`, diagnostics to `err`. With --json exactly one JSON document is
/// written to `out`, including on domain errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace preassess
