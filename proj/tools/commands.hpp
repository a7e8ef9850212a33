#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "bnpsurv/data.hpp"

namespace bnpsurv::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

/// Runs the tool with argv-style arguments (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

/// Grid spec: "auto" (512 points on [0, 1.5 max T] plus event times),
/// "N:lo:hi" (N equally spaced points) or a comma-separated list.
std::vector<double> parse_grid(std::string_view spec, const SurvivalSample& sample);

}  // namespace bnpsurv::cli
