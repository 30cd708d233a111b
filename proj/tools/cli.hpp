#pragma once

#include <string>
#include <vector>

namespace paramshap {

/// Runs the command line given the arguments after the program name.
/// Returns the process exit code: 0 success, 1 budget/internal failure,
/// 2 input validation or usage error.
int run_cli(const std::vector<std::string>& args);

}  // namespace paramshap
