#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mixlab/json_io.hpp"

namespace mixlab::io {

/// Typed reader over a JSON object. Every accessor records the key; `finish()`
/// rejects any key that was never read. Errors are ConfigError with the
/// dotted path of the offending field.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path);

  bool has(const std::string& key) const { return j_->contains(key); }
  std::string path(const std::string& key) const;

  double real(const std::string& key);
  double real(const std::string& key, double fallback);
  double positive(const std::string& key, std::optional<double> fallback = {});
  double nonnegative(const std::string& key, std::optional<double> fallback = {});
  std::uint64_t count(const std::string& key, std::optional<std::uint64_t> fallback = {});
  bool flag(const std::string& key, bool fallback);
  std::string text(const std::string& key, std::optional<std::string> fallback = {});
  std::vector<double> reals(const std::string& key);
  std::vector<double> reals(const std::string& key, std::vector<double> fallback);
  // Nonnegative entries summing to 1 within 1e-9.
  std::vector<double> probability(const std::string& key);
  const Json& raw(const std::string& key);
  ObjectReader object(const std::string& key);

  void finish() const;

 private:
  const Json& need(const std::string& key);

  const Json* j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace mixlab::io
