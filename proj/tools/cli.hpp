#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xfermse::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;      // bad flags, unreadable or malformed files, invalid config
inline constexpr int kExitDimension = 3;  // shape mismatch, k out of range
inline constexpr int kExitDegenerate = 4; // constant or all-tied input to a statistic
inline constexpr int kExitLemma = 5;      // --check-lemmas found a violation

inline constexpr int kSchemaVersion = 1;

/// Runs one command line (args[0] is the program name). JSON goes to `out`
/// unless --out is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xfermse::cli
