#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace branchlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitConvergence = 3;

/// Parses and runs one command line (arguments after the program name). The JSON summary goes to `out` and to
/// <out-dir>/<subcommand>.json; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace branchlab::cli
