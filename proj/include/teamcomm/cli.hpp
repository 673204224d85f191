#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace teamcomm {

// Runs one CLI invocation (args exclude the program name). Returns 0 on
// success, 1 on usage errors, 2 on data errors.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace teamcomm
