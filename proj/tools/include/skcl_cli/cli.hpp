#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace skcl::cli {

// Runs one CLI invocation; args excludes the program name. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace skcl::cli
