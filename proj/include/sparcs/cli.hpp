#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sparcs::cli {

/// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
enum ExitCode : int { Ok = 0, Usage = 1, DataError = 2, NumericalFailure = 3 };

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace sparcs::cli
