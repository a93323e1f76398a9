#pragma once

#include <iosfwd>

namespace wbary {

/// Process exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,      // parse or configuration error
  kExitNumerical = 3,  // solver produced a non-finite value
  kExitUnderflow = 4,  // naive IBP kernel or scalings underflowed
};

/// Entry point of the `wbary` tool; subcommands `barycenter`, `gap` and
/// `gaussian-bench`. Diagnostics go to `err`, results to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wbary
