#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace blurgp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

/// Runs the command line in-process. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

}  // namespace blurgp::cli
