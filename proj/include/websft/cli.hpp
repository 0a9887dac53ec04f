#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace websft {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;  // config or data error
inline constexpr int kExitUsage = 2;

// Runs one subcommand. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

// pairs / seed_total as a percentage with one decimal, e.g. "28.9%".
std::string format_pair_rate(std::size_t pairs, std::size_t seed_total);

}  // namespace websft
