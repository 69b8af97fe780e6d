#pragma once

#include <string>
#include <vector>

namespace srde {

/// Full command-line entry point (argv without the program name). Returns the
/// process exit code: 0 success, 1 configuration error, 2 runtime failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace srde
