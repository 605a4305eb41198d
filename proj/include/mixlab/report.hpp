#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mixlab {

enum class Provenance { exact, user_supplied, estimated };

// parameter_free reports are theorems: a failure is a bug. constant reports
// depend on a supplied or estimated constant. premise reports probe a
// hypothesis the theorem assumes.
enum class ReportKind { parameter_free, constant, premise };

struct ConstantUsed {
  std::string name;
  double value = 0.0;
  Provenance provenance = Provenance::exact;
};

struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool pass = false;
  std::string inputs_digest;
  std::vector<ConstantUsed> constants_used;
  ReportKind kind = ReportKind::parameter_free;
  std::string note;

  // "pass", "violation", "constant underestimate suspected" or
  // "premise not certified".
  std::string status() const;
  bool estimated() const;
};

/// pass iff rhs - lhs >= -1e-9 (1 + |rhs|); an infinite rhs always passes.
InequalityReport make_report(std::string name, double lhs, double rhs,
                             std::string digest, ReportKind kind,
                             std::vector<ConstantUsed> constants = {});

const char* to_string(Provenance p);
const char* to_string(ReportKind k);

/// 64-bit FNV-1a over the raw bytes of the inputs.
class Digest {
 public:
  Digest& add(double v);
  Digest& add(std::uint64_t v);
  Digest& add(std::span<const double> v);
  Digest& add(std::string_view s);
  std::uint64_t value() const { return h_; }
  std::string hex() const;

 private:
  void bytes(const void* p, std::size_t n);
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

// True when every parameter-free report passed.
bool theorems_hold(const std::vector<InequalityReport>& reports);

}  // namespace mixlab
