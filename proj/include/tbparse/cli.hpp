#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tbparse::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one subcommand (train, parse, segment, align, cluster, eval). args
/// excludes the program name. Reports go to out, diagnostics to err; setting
/// TBPARSE_LOG=quiet keeps err to error messages only.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tbparse::cli
