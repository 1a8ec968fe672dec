#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace chwfr::cli {

/// Runs one command line (without the program name). Writes a JSON document
/// to `out` and returns the process exit status: 0 success, 1 invalid input,
/// 2 solver failure.
int run(const std::vector<std::string>& args, std::ostream& out);

}  // namespace chwfr::cli
