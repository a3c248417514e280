#pragma once

#include <string>
#include <vector>

namespace cascadeforge {

// Full command-line entry point (argv semantics, without argv[0]).
// Returns the process exit code; prints a one-line diagnostic to stderr on
// failure.
int run_cli(const std::vector<std::string>& args);

} // namespace cascadeforge
