#pragma once

#include <iosfwd>

namespace tollcast::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

/// Parses the command line, runs one subcommand, writes its manifest, and
/// returns the process exit code. Normal output goes to `out`, diagnostics to
/// `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tollcast::cli
