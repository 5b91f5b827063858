#pragma once

#include <iosfwd>
#include <map>
#include <string>

namespace dynaboard::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

// dynaboard {submit|eval|board|perturb|serve} [flags]
// Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// "perf=4,throughput=1" -> {perf: 4, throughput: 1}. Throws
// std::invalid_argument on malformed pairs or negative weights.
std::map<std::string, double> parse_weight_list(const std::string& text);

}  // namespace dynaboard::cli
