#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lossmetro {

/// Runs one command line (without the program name). Returns the process
/// exit code: 0 on success, 2 on usage errors and validation failures,
/// 3 on numerical failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lossmetro
