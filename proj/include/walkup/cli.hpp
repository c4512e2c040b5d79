#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace walkup::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidationFailure = 1;
inline constexpr int kUsageError = 2;
inline constexpr int kIoError = 3;

/// Runs one command line (without the program name). Results go to files or
/// `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace walkup::cli
