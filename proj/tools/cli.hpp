#pragma once

// Command-line surface. run() parses argv, executes one experiment and writes
// the report; main() is a thin wrapper so tests can drive it in-process.
//
// Exit status: 0 pass, 1 an assertion of the experiment failed, 2 usage or
// module error. Failures of either kind also print one JSON record to `err`.

#include <iosfwd>
#include <string>
#include <vector>

namespace shiftconv::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace shiftconv::cli
