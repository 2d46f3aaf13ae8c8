#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sforge::cli {

enum ExitCode : int {
    kOk = 0,
    kInputError = 1,
    kNumericFailure = 2,
    kRefused = 3,
};

/// Runs the command line; `args` excludes the program name. JSON goes to `out`
/// (or the --output file), usage problems to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sforge::cli
