#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace semisup::cli {

/// Runs the command line. Exit status: 0 success, 1 validation or usage
/// error, 2 runtime failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semisup::cli
