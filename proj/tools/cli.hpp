#pragma once

#include <iosfwd>

namespace symreg::cli {

/// Exit code for malformed command lines.
inline constexpr int kUsageError = 2;

/// Runs the command line tool. Domain errors exit with their ErrorCode value.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace symreg::cli
