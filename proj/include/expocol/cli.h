#ifndef EXPOCOL_CLI_H_
#define EXPOCOL_CLI_H_

#include <iosfwd>
#include <span>
#include <string>

namespace expocol {

// Exit codes of the nls-expocol tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDivergence = 2;
inline constexpr int kExitMissingReference = 3;

// nls-expocol run|converge|drift|compare|reference --config <path>
//   [--out <dir>] [--method <name>]... [--override key=value]...
//   [--jobs <n>] [--plot]
// `args` excludes the program name.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace expocol

#endif  // EXPOCOL_CLI_H_
