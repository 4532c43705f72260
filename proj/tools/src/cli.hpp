#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bmc::cli {

// Entry point of the `bmc` tool; args exclude the program name. Returns the
// process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bmc::cli
