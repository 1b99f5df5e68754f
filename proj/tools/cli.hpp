// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace rankstego::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitCodec = 2,
  kExitCapacity = 3,
};

// Environment variable consulted for the session key when --key-hex is
// absent. Precedence: flag, then environment, then the config file.
inline constexpr const char* kKeyEnv = "RANKSTEGO_KEY";

// Entry point shared by main() and the tests. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err, const std::map<std::string, std::string>& env);

}  // namespace rankstego::cli
