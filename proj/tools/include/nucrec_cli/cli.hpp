#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nucrec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitViolation = 3;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitNumeric = 70;
inline constexpr int kExitIo = 74;

/// Runs one invocation. `args` excludes the program name, e.g.
/// {"solve", "--n", "10"}. Results go to `out`, logs and diagnostics to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses a grid given as "a,b,c" or "start:stop:step" (inclusive stop,
/// values rounded to 10 decimals). Throws DomainError on malformed input.
std::vector<double> parse_grid(const std::string& text);

/// Reads flat key=value lines ('#' comments and blank lines ignored) and turns
/// them into "--key=value" arguments. Throws IoError or DomainError.
std::vector<std::string> config_arguments(const std::string& path);

}  // namespace nucrec::cli
