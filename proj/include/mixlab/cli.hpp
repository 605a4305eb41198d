#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mixlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitTheoremViolation = 1;
inline constexpr int kExitConstantFailure = 2;
inline constexpr int kExitSchema = 64;
inline constexpr int kExitNumeric = 65;

const std::vector<std::string>& experiments();

struct Options {
  std::string experiment;
  std::optional<std::string> config;  // JSON file; absent means all defaults
  std::optional<std::string> out;     // overrides the config's "out"
  std::optional<std::uint64_t> seed;  // overrides the config's "seed"
  bool plots = false;
  int threads = 0;
};

/// Runs one experiment and returns its exit status:
///   0  every parameter-free report passed (estimated-constant shortfalls warn)
///   1  a parameter-free report failed
///   2  a report using a user-supplied or exact constant failed
///   64 schema violation, 65 numeric failure.
int run(const Options& options, std::ostream& out, std::ostream& err);

}  // namespace mixlab::cli
