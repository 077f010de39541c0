#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace heatsing::cli {

/// Exit statuses of every subcommand.
enum ExitCode : int {
    kOk = 0,
    kFailed = 1,       // a verification verdict failed, or a module raised an error
    kConfigError = 2,  // unusable command line or configuration
};

/// Runs one command line (args excludes the program name). Artifacts go to
/// --out; a short summary goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace heatsing::cli
