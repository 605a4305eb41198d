#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mixlab/measure.hpp"

namespace mixlab {

enum class CostKind { metric, squared_metric, zero_one };

/// Finite nonnegative cost on a state space. Flags are certified at
/// construction within 1e-9.
class CostMatrix {
 public:
  CostMatrix(SpacePtr space, std::vector<double> cost);

  static CostMatrix from_space(SpacePtr space, CostKind kind);
  static CostMatrix from_csv(SpacePtr space, const std::string& path);

  std::size_t size() const { return n_; }
  const StateSpace& space() const { return *space_; }
  double operator()(std::size_t x, std::size_t y) const { return c_[x * n_ + y]; }
  const std::vector<double>& values() const { return c_; }
  bool is_metric() const { return is_metric_; }
  bool zero_diagonal() const { return zero_diagonal_; }
  double max_cost() const;

 private:
  SpacePtr space_;
  std::size_t n_;
  std::vector<double> c_;
  bool is_metric_ = false;
  bool zero_diagonal_ = false;
};

/// Dense coupling, row-major gamma(x, y).
struct Coupling {
  std::size_t n = 0;
  std::vector<double> gamma;

  double operator()(std::size_t x, std::size_t y) const { return gamma[x * n + y]; }
  std::vector<double> first_marginal() const;
  std::vector<double> second_marginal() const;
};

/// alpha(x) = (x / a)^p with a > 0, p >= 1. The W1 case x^2 / (4 C^2) is the
/// member a = 2C, p = 2, kept as a named family for reporting.
class AlphaFunction {
 public:
  enum class Family { power, w1 };

  static AlphaFunction power(double a, double p);
  static AlphaFunction w1(double C);

  double operator()(double x) const;
  Family family() const { return family_; }
  double scale() const { return a_; }
  double exponent() const { return p_; }
  std::string describe() const;

 private:
  AlphaFunction(Family family, double a, double p) : family_(family), a_(a), p_(p) {}

  Family family_;
  double a_;
  double p_;
};

struct OtResult {
  double value = 0.0;
  Coupling coupling;
  std::vector<double> f;  // potential on the first marginal
  std::vector<double> g;  // potential on the second marginal
  double duality_gap = 0.0;
  double potential_violation = 0.0;  // max (f(x) + g(y) - c(x, y))^+
  double complementary_slackness = 0.0;
  long iterations = 0;
};

struct HullTransportSolution {
  double value = 0.0;
  FiniteMeasure lambda_hat;
  Coupling coupling;
  std::vector<double> f;
  std::vector<double> g;
  // value - (mu(f) + min_i pi_i(g))
  double duality_gap = 0.0;
  double potential_violation = 0.0;
  long iterations = 0;
};

struct DualHullResult {
  double value = 0.0;
  std::vector<double> f;
  std::vector<double> g;
  std::size_t active_component = 0;
  // mu(f) + min_i pi_i(f^c) for the returned f.
  double conjugate_value = 0.0;
  long iterations = 0;
};

OtResult ot_cost(const FiniteMeasure& mu, const FiniteMeasure& nu, const CostMatrix& c);
HullTransportSolution ot_to_hull(const FiniteMeasure& mu, const MixtureModel& mix,
                                 const CostMatrix& c);
std::vector<double> c_conjugate(std::span<const double> f, const CostMatrix& c);
DualHullResult dual_to_hull(const FiniteMeasure& mu, const MixtureModel& mix,
                            const CostMatrix& c);

struct TvHullResult {
  double value = 0.0;
  FiniteMeasure lambda_hat;
};
/// inf over the hull of the total-variation distance, as a small LP.
TvHullResult tv_to_hull(const FiniteMeasure& mu, const MixtureModel& mix);

/// Squared quadratic transport cost between measures on the line via the
/// quantile coupling.
double w2_1d(const FiniteMeasure& mu, const FiniteMeasure& nu);

}  // namespace mixlab
