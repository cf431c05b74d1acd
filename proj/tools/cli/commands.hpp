#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hybridaug::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one invocation. `args` excludes the program name. Returns 0 on
/// success, 2 for usage errors and 1 for any other failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hybridaug::cli
