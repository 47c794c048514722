#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mcoupler/error.hpp"

namespace mcoupler::app {

enum ExitCode : int {
    kOk = 0,
    kInputError = 2,
    kNumericError = 3,
    kNotConverged = 4,
};

int exit_code_for(ErrorCode code);

/// Runs one command line (without the program name). Data products go to
/// the --out file or, without it, to `out`; diagnostics and the
/// human-readable summary go to `err` (or to `out` when --out is used).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mcoupler::app
