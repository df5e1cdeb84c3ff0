#pragma once

#include <string>
#include <vector>

namespace ucn {

// Runs one ucnopt invocation. args excludes the program name. Exit status:
// 0 success, 1 runtime failure, 2 usage error. The UCNOPT_OUT environment
// variable overrides any --out value.
int run_command(const std::vector<std::string>& args);

}  // namespace ucn
