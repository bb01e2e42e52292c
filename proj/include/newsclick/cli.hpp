#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace newsclick {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitIo = 3 };

/// Runs one subcommand. `args` excludes the program name. Reports go to
/// `out`, diagnostics to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace newsclick
