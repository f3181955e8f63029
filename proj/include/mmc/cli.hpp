#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mmc {

/// Exit codes of the command-line front end.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitConfig = 2,
    kExitDivergence = 3,
    kExitIo = 4,
};

/// Entry point of `mmcsim`; `args` excludes the program name.
///
///   run    [--config PATH] [--algorithm v1f2|v1fc] [--out-dir PATH]
///          [--duration S] [--profile paper|fast] [--dc-model stiff|piline]
///   report --out-dir PATH
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace mmc
