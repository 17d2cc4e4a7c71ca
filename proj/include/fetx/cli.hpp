#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fetx {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitData = 3,
    kExitAcceptance = 4,
};

/// Demo pass thresholds: median rms% per reported curve, then the
/// subthreshold median. The variability averages may reach twice these.
inline constexpr double kDemoMedianLimits[5] = {1.0, 3.0, 4.0, 6.0, 6.0};
inline constexpr double kDemoSubthresholdLimit = 1.0;
inline constexpr double kDemoVariabilityFactor = 2.0;

/// Entry point of the `fetx` tool. `args` excludes the program name.
/// Errors go to `err` as a single JSON line: {"error":kind,"exit":code,"message":...}.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fetx
