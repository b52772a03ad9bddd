#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace protoneuro::cli {

// Entry point of the `protoneuro` tool. `args` excludes the program name.
// Returns the process exit status: 0 success, 1 I/O, 2 validation,
// 3 numeric failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace protoneuro::cli
