#pragma once

#include <string>
#include <vector>

namespace ccw {

// Exit codes: 0 success / pass, 1 fail verdict or numeric failure,
// 2 usage error, 3 structural defect.
int run_cli(const std::vector<std::string>& args);

}  // namespace ccw
