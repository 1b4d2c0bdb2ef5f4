#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kgcounsel {

// Runs the command line; returns the process exit status (0 ok, 1 runtime
// failure, 2 usage error). args[0] is the program name.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_run(int argc, char** argv);

}  // namespace kgcounsel
