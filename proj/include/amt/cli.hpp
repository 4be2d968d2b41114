#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace amt::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kUnreadableInput = 2,
  kDimensionMismatch = 3,
  kInvalidTime = 4,
  kWeightsError = 5,
  kEmptyDirectory = 6,
};

/// Entry point shared by the `amt` executable and the tests. args excludes
/// the program name, e.g. {"info", "--weights", "w.amtw", "--json"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Output path for frame `index` (1-based) of `count`. A "{}" in pattern is
/// replaced by the index; otherwise "_<index>" is inserted before the
/// extension when count > 1.
std::string output_path(const std::string& pattern, int index, int count);

/// Time steps i / (steps + 1) for i = 1..steps.
std::vector<float> time_steps(int steps);

}  // namespace amt::cli
