#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace casbridge::cli {

enum ExitCode : int {
    kOk = 0,             // verified, or nothing found to object to
    kFalse = 1,          // checked false, or a counterexample
    kOutOfFragment = 2,  // input outside what the pipeline handles
    kTransport = 3,      // oracle or socket failure
    kUsage = 64,
};

/// Runs one command line (without the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace casbridge::cli
