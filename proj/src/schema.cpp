#include "mixlab/schema.hpp"

#include <cmath>

#include "mixlab/error.hpp"

namespace mixlab::io {

namespace {

double as_real(const Json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "-inf" || s == "nan") return number(v);
  }
  throw ConfigError(where + ": expected a number");
}

}  // namespace

ObjectReader::ObjectReader(const Json& j, std::string path) : j_(&j), path_(std::move(path)) {
  if (!j.is_object()) throw ConfigError(path_ + ": expected an object");
}

std::string ObjectReader::path(const std::string& key) const {
  return path_.empty() ? key : path_ + "." + key;
}

const Json& ObjectReader::need(const std::string& key) {
  seen_.insert(key);
  if (!j_->contains(key)) throw ConfigError(path(key) + ": required field missing");
  return (*j_)[key];
}

const Json& ObjectReader::raw(const std::string& key) { return need(key); }

double ObjectReader::real(const std::string& key) {
  const double v = as_real(need(key), path(key));
  if (!std::isfinite(v)) throw ConfigError(path(key) + ": must be finite");
  return v;
}

double ObjectReader::real(const std::string& key, double fallback) {
  seen_.insert(key);
  return has(key) ? real(key) : fallback;
}

double ObjectReader::positive(const std::string& key, std::optional<double> fallback) {
  seen_.insert(key);
  if (!has(key) && fallback) return *fallback;
  const double v = real(key);
  if (!(v > 0.0)) throw ConfigError(path(key) + ": must be positive");
  return v;
}

double ObjectReader::nonnegative(const std::string& key, std::optional<double> fallback) {
  seen_.insert(key);
  if (!has(key) && fallback) return *fallback;
  const double v = real(key);
  if (!(v >= 0.0)) throw ConfigError(path(key) + ": must be nonnegative");
  return v;
}

std::uint64_t ObjectReader::count(const std::string& key, std::optional<std::uint64_t> fallback) {
  seen_.insert(key);
  if (!has(key) && fallback) return *fallback;
  const auto& v = need(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ConfigError(path(key) + ": expected a nonnegative integer");
}

bool ObjectReader::flag(const std::string& key, bool fallback) {
  seen_.insert(key);
  if (!has(key)) return fallback;
  const auto& v = need(key);
  if (!v.is_boolean()) throw ConfigError(path(key) + ": expected true or false");
  return v.get<bool>();
}

std::string ObjectReader::text(const std::string& key, std::optional<std::string> fallback) {
  seen_.insert(key);
  if (!has(key) && fallback) return *fallback;
  const auto& v = need(key);
  if (!v.is_string()) throw ConfigError(path(key) + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> ObjectReader::reals(const std::string& key) {
  const auto& v = need(key);
  if (!v.is_array()) throw ConfigError(path(key) + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string where = path(key) + "[" + std::to_string(i) + "]";
    const double x = as_real(v[i], where);
    if (!std::isfinite(x)) throw ConfigError(where + ": must be finite");
    out.push_back(x);
  }
  return out;
}

std::vector<double> ObjectReader::reals(const std::string& key, std::vector<double> fallback) {
  seen_.insert(key);
  return has(key) ? reals(key) : fallback;
}

std::vector<double> ObjectReader::probability(const std::string& key) {
  auto p = reals(key);
  if (p.empty()) throw ConfigError(path(key) + ": must not be empty");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0)
      throw ConfigError(path(key) + "[" + std::to_string(i) + "]: must be nonnegative");
    s += p[i];
  }
  if (std::abs(s - 1.0) > 1e-9) throw ConfigError(path(key) + ": must sum to 1");
  return p;
}

ObjectReader ObjectReader::object(const std::string& key) { return {need(key), path(key)}; }

void ObjectReader::finish() const {
  for (auto it = j_->begin(); it != j_->end(); ++it)
    if (!seen_.count(it.key())) throw ConfigError(path(it.key()) + ": unknown field");
}

}  // namespace mixlab::io
