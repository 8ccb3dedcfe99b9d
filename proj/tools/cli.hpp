#ifndef GPB_TOOLS_CLI_HPP
#define GPB_TOOLS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace gpb::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConfig = 2,
  kExitRuntime = 3,
};

/// Entry point behind the gpb binary; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace gpb::cli

#endif  // GPB_TOOLS_CLI_HPP
