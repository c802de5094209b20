#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mzsim {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

/// Entry point of the `mzsim` tool. `args` includes the program name.
///
///   mzsim [global flags] <single-bs | mzi | sweep | analyze FILE | compare-qm FILE>
///
/// Flags override values read from --config, which override the reference defaults.
/// Data goes to --out (or `out` when absent); diagnostics go to `err` as one line.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, const char* const* argv);

}  // namespace mzsim
