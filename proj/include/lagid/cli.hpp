#pragma once

#include <iosfwd>

#include "lagid/error.hpp"

namespace lagid {

// Process exit codes of the `lagid` tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitConfig = 2,      // bad config file, flag or argument value
    kExitIo = 3,          // file missing, unreadable or unwritable
    kExitSchema = 4,      // malformed dataset or model file
    kExitSingularity = 5, // rank-deficient regression or unnormalizable model
    kExitSensitivity = 6, // output map lost monotonicity during identification
    kExitDivergence = 7,  // simulation blew up or arithmetic broke down
    kExitMismatch = 8,    // model structure inconsistent with its blocks
};

[[nodiscard]] int exit_code(ErrorKind kind) noexcept;

// Entry point behind the executable; output streams are injectable for tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace lagid
