#pragma once

#include <string>
#include <vector>

namespace art {

// Entry point behind main(). Exit codes: 0 ok, 1 runtime failure,
// 2 configuration error, 3 data error.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& argv);

}  // namespace art
