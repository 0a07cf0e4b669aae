// SPDX-License-Identifier: Apache-2.0

#ifndef IPD_CLI_H_
#define IPD_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace ipd::cli {

// Exit codes are a stable scripting contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitNoPairs = 3;

// Runs the command line (args excludes the program name). Reports go to `out`
// unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace ipd::cli

#endif  // IPD_CLI_H_
