#include "mixlab/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

namespace mixlab {

InequalityReport make_report(std::string name, double lhs, double rhs,
                             std::string digest, ReportKind kind,
                             std::vector<ConstantUsed> constants) {
  InequalityReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.inputs_digest = std::move(digest);
  r.kind = kind;
  r.constants_used = std::move(constants);
  if (rhs == std::numeric_limits<double>::infinity()) {
    r.margin = rhs;
    r.pass = true;
  } else {
    r.margin = rhs - lhs;
    r.pass = !std::isnan(r.margin) && r.margin >= -1e-9 * (1.0 + std::abs(rhs));
  }
  return r;
}

bool InequalityReport::estimated() const {
  for (const auto& c : constants_used)
    if (c.provenance == Provenance::estimated) return true;
  return false;
}

std::string InequalityReport::status() const {
  if (pass) return "pass";
  if (kind == ReportKind::premise) return "premise not certified";
  if (kind == ReportKind::constant && estimated())
    return "constant underestimate suspected";
  return "violation";
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::exact: return "exact";
    case Provenance::user_supplied: return "user-supplied";
    case Provenance::estimated: return "estimated lower bound";
  }
  return "?";
}

const char* to_string(ReportKind k) {
  switch (k) {
    case ReportKind::parameter_free: return "parameter-free";
    case ReportKind::constant: return "constant-dependent";
    case ReportKind::premise: return "premise";
  }
  return "?";
}

void Digest::bytes(const void* p, std::size_t n) {
  const auto* c = static_cast<const unsigned char*>(p);
  for (std::size_t i = 0; i < n; ++i) {
    h_ ^= c[i];
    h_ *= 0x100000001b3ULL;
  }
}

Digest& Digest::add(double v) {
  if (v == 0.0) v = 0.0;  // fold -0
  bytes(&v, sizeof v);
  return *this;
}

Digest& Digest::add(std::uint64_t v) {
  bytes(&v, sizeof v);
  return *this;
}

Digest& Digest::add(std::span<const double> v) {
  add(static_cast<std::uint64_t>(v.size()));
  for (double x : v) add(x);
  return *this;
}

Digest& Digest::add(std::string_view s) {
  add(static_cast<std::uint64_t>(s.size()));
  bytes(s.data(), s.size());
  return *this;
}

std::string Digest::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
  return buf;
}

bool theorems_hold(const std::vector<InequalityReport>& reports) {
  for (const auto& r : reports)
    if (r.kind == ReportKind::parameter_free && !r.pass) return false;
  return true;
}

}  // namespace mixlab
