#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace netswap::cli {

enum ExitCode { Ok = 0, Violation = 1, InputError = 2, CapExceeded = 3 };

// Runs the netswap command line. `args` excludes the program name. JSON goes to `out`,
// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace netswap::cli
