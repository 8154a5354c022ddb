#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crsh {

/// Exit codes of the command-line renderer.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitUsage = 2,
    kExitIo = 3,
    kExitConfigLimit = 4,
};

/// `args` excludes the program name. Messages go to `out` and `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace crsh
