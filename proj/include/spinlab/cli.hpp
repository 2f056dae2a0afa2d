#pragma once

#include <string>
#include <vector>

namespace spinlab {

// Entry point shared by the binary and the tests.
// Exit codes: 0 success, 2 parameter error, 3 budget error.
int run_cli(std::vector<std::string> args);

}  // namespace spinlab
