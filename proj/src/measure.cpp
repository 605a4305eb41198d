#include "mixlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixlab/error.hpp"

namespace mixlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kFlushBelow = 1e-300;
constexpr double kMetricTol = 1e-9;

// One term of the Bregman form of KL: p log(p/q) - p + q >= 0. Summing these
// gives KL exactly when both sides are normalized, without cancellation.
double kl_term(double p, double q) {
  if (p == 0.0) return q;
  if (q == 0.0) return kInf;
  return p * std::log1p((p - q) / q) - (p - q);
}

}  // namespace

std::shared_ptr<const StateSpace> StateSpace::make(std::size_t size,
                                                   Options options) {
  if (size == 0) throw ConfigError("state space must have at least one state");
  auto space = std::shared_ptr<StateSpace>(new StateSpace());
  space->size_ = size;
  if (!options.labels.empty() && options.labels.size() != size)
    throw DimensionError("state labels do not match the space size");
  if (!options.coords.empty() && options.coords.size() != size)
    throw DimensionError("state coordinates do not match the space size");
  if (!options.metric.empty()) {
    const auto& d = options.metric;
    if (d.size() != size * size)
      throw DimensionError("metric must be size x size");
    for (std::size_t x = 0; x < size; ++x) {
      if (d[x * size + x] != 0.0)
        throw ConfigError("metric has a nonzero diagonal entry");
      for (std::size_t y = 0; y < size; ++y) {
        const double dxy = d[x * size + y];
        if (!std::isfinite(dxy)) throw ConfigError("metric entry is not finite");
        if (x != y && !(dxy > 0.0))
          throw ConfigError("metric must be strictly positive off the diagonal");
        if (std::abs(dxy - d[y * size + x]) > kMetricTol)
          throw ConfigError("metric is not symmetric");
      }
    }
    for (std::size_t x = 0; x < size; ++x)
      for (std::size_t y = 0; y < size; ++y)
        for (std::size_t z = 0; z < size; ++z)
          if (d[x * size + z] > d[x * size + y] + d[y * size + z] + kMetricTol)
            throw ConfigError("metric violates the triangle inequality");
  }
  space->labels_ = std::move(options.labels);
  space->coords_ = std::move(options.coords);
  space->metric_ = std::move(options.metric);
  return space;
}

std::shared_ptr<const StateSpace> StateSpace::line(std::vector<double> coords) {
  const std::size_t n = coords.size();
  Options options;
  options.metric.resize(n * n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      options.metric[x * n + y] = std::abs(coords[x] - coords[y]);
  options.coords = std::move(coords);
  return make(n, std::move(options));
}

std::shared_ptr<const StateSpace> StateSpace::indices(std::size_t m) {
  return make(m);
}

bool StateSpace::structurally_equal(const StateSpace& other) const {
  if (this == &other) return true;
  if (size_ != other.size_) return false;
  if (has_coords() && other.has_coords() && coords_ != other.coords_)
    return false;
  return true;
}

FiniteMeasure::FiniteMeasure(SpacePtr space, std::vector<double> mass)
    : space_(std::move(space)), mass_(std::move(mass)) {
  if (!space_) throw ConfigError("measure requires a state space");
  if (mass_.size() != space_->size())
    throw DimensionError("mass vector length " + std::to_string(mass_.size()) +
                         " does not match space size " +
                         std::to_string(space_->size()));
  double total = 0.0;
  for (std::size_t x = 0; x < mass_.size(); ++x) {
    double& v = mass_[x];
    if (!std::isfinite(v) || v < 0.0)
      throw ConfigError("measure entry " + std::to_string(x) +
                        " is negative or not finite");
    if (v < kFlushBelow) v = 0.0;
    total += v;
  }
  if (!(total > 0.0)) throw ConfigError("measure has zero total mass");
  correction_ = std::abs(total - 1.0);
  // Vectors already normalized up to summation rounding are kept as given, so
  // that rebuilding a measure from its own values is the identity.
  if (correction_ > static_cast<double>(mass_.size()) * kEps)
    for (auto& v : mass_) v /= total;
}

FiniteMeasure FiniteMeasure::on_indices(std::vector<double> mass) {
  auto space = StateSpace::indices(mass.size());
  return FiniteMeasure(std::move(space), std::move(mass));
}

FiniteMeasure FiniteMeasure::uniform(SpacePtr space) {
  const std::size_t n = space->size();
  return FiniteMeasure(std::move(space), std::vector<double>(n, 1.0 / n));
}

FiniteMeasure FiniteMeasure::point_mass(SpacePtr space, std::size_t x) {
  std::vector<double> mass(space->size(), 0.0);
  mass.at(x) = 1.0;
  return FiniteMeasure(std::move(space), std::move(mass));
}

double FiniteMeasure::expectation(std::span<const double> f) const {
  if (f.size() != mass_.size())
    throw DimensionError("function length does not match measure");
  double s = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x)
    if (mass_[x] > 0.0) s += mass_[x] * f[x];
  return s;
}

bool same_space(const FiniteMeasure& a, const FiniteMeasure& b) {
  return a.space_ptr() == b.space_ptr() ||
         a.space().structurally_equal(b.space());
}

void require_same_space(const FiniteMeasure& a, const FiniteMeasure& b,
                        const char* op) {
  if (!same_space(a, b))
    throw DimensionError(std::string(op) + ": measures live on different spaces (" +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + " states)");
}

MixtureModel::MixtureModel(std::vector<FiniteMeasure> components,
                           FiniteMeasure weights)
    : components_(std::move(components)),
      weights_(std::move(weights)),
      parent_(FiniteMeasure::on_indices({1.0})) {
  if (components_.empty()) throw ConfigError("mixture needs a component");
  if (weights_.size() != components_.size())
    throw DimensionError("mixture weights do not match component count");
  for (std::size_t i = 0; i < weights_.size(); ++i)
    if (!(weights_[i] > 0.0))
      throw ConfigError("mixture weight " + std::to_string(i) +
                        " is not strictly positive");
  const auto& first = components_.front();
  for (const auto& c : components_) require_same_space(first, c, "mixture");
  std::vector<double> mass(first.size(), 0.0);
  for (std::size_t i = 0; i < components_.size(); ++i)
    for (std::size_t x = 0; x < mass.size(); ++x)
      mass[x] += weights_[i] * components_[i][x];
  parent_ = FiniteMeasure(first.space_ptr(), std::move(mass));
}

MixtureModel::MixtureModel(std::vector<FiniteMeasure> components,
                           FiniteMeasure weights, const FiniteMeasure& parent)
    : MixtureModel(std::move(components), std::move(weights)) {
  require_same_space(parent_, parent, "mixture parent");
  double worst = 0.0;
  for (std::size_t x = 0; x < parent.size(); ++x)
    worst = std::max(worst, std::abs(parent[x] - parent_[x]));
  if (worst > 1e-12)
    throw InvariantViolation("parent differs from the weighted component sum",
                             worst);
}

FiniteMeasure MixtureModel::reweighted(const FiniteMeasure& lambda) const {
  if (lambda.size() != components_.size())
    throw DimensionError("reweighting vector does not match component count");
  std::vector<double> mass(num_states(), 0.0);
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (lambda[i] == 0.0) continue;
    for (std::size_t x = 0; x < mass.size(); ++x)
      mass[x] += lambda[i] * components_[i][x];
  }
  return FiniteMeasure(space_ptr(), std::move(mass));
}

JointLabeledMeasure::JointLabeledMeasure(std::size_t m, std::size_t n,
                                         std::vector<double> mass)
    : m_(m), n_(n), mass_(std::move(mass)) {
  if (mass_.size() != m * n)
    throw DimensionError("joint measure has the wrong number of entries");
}

std::vector<double> JointLabeledMeasure::index_marginal() const {
  std::vector<double> out(m_, 0.0);
  for (std::size_t i = 0; i < m_; ++i)
    for (std::size_t x = 0; x < n_; ++x) out[i] += mass_[i * n_ + x];
  return out;
}

std::vector<double> JointLabeledMeasure::state_marginal() const {
  std::vector<double> out(n_, 0.0);
  for (std::size_t i = 0; i < m_; ++i)
    for (std::size_t x = 0; x < n_; ++x) out[x] += mass_[i * n_ + x];
  return out;
}

std::vector<double> JointLabeledMeasure::conditional(std::size_t i) const {
  double total = 0.0;
  for (std::size_t x = 0; x < n_; ++x) total += mass_[i * n_ + x];
  if (total == 0.0) return {};
  std::vector<double> out(n_);
  for (std::size_t x = 0; x < n_; ++x) out[x] = mass_[i * n_ + x] / total;
  return out;
}

double kl_divergence(const FiniteMeasure& mu, const FiniteMeasure& nu) {
  require_same_space(mu, nu, "kl_divergence");
  double s = 0.0;
  for (std::size_t x = 0; x < mu.size(); ++x) {
    const double t = kl_term(mu[x], nu[x]);
    if (t == kInf) return kInf;
    s += t;
  }
  return std::max(s, 0.0);
}

double tv_distance(const FiniteMeasure& mu, const FiniteMeasure& nu) {
  require_same_space(mu, nu, "tv_distance");
  double s = 0.0;
  for (std::size_t x = 0; x < mu.size(); ++x) s += std::abs(mu[x] - nu[x]);
  return std::min(0.5 * s, 1.0);
}

std::vector<double> density(const FiniteMeasure& mu, const FiniteMeasure& nu) {
  require_same_space(mu, nu, "density");
  std::vector<double> f(mu.size(), 0.0);
  for (std::size_t x = 0; x < mu.size(); ++x) {
    if (nu[x] > 0.0) {
      f[x] = mu[x] / nu[x];
    } else if (mu[x] > 0.0) {
      throw SupportError("measure is not absolutely continuous", x);
    }
  }
  return f;
}

FiniteMeasure responsibilities(const FiniteMeasure& mu, const MixtureModel& mix) {
  const auto& pi = mix.parent();
  require_same_space(mu, pi, "responsibilities");
  const auto f = density(mu, pi);
  std::vector<double> lambda(mix.num_components(), 0.0);
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const auto& pi_i = mix.component(i);
    double s = 0.0;
    for (std::size_t x = 0; x < f.size(); ++x) s += pi_i[x] * f[x];
    lambda[i] = mix.weights()[i] * s;
  }
  return FiniteMeasure(mix.weights().space_ptr(), std::move(lambda));
}

ResponsibilityDecomposition decompose(const FiniteMeasure& mu,
                                      const MixtureModel& mix) {
  const auto& pi = mix.parent();
  auto lambda = responsibilities(mu, mix);
  const auto f = density(mu, pi);
  const std::size_t n = mu.size();
  const std::size_t m = mix.num_components();

  std::vector<FiniteMeasure> conditionals;
  conditionals.reserve(m);
  std::vector<std::size_t> fallbacks;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& pi_i = mix.component(i);
    if (lambda[i] == 0.0) {
      fallbacks.push_back(i);
      conditionals.push_back(pi_i);
      continue;
    }
    const double scale = mix.weights()[i] / lambda[i];
    std::vector<double> mass(n);
    for (std::size_t x = 0; x < n; ++x) mass[x] = scale * f[x] * pi_i[x];
    conditionals.emplace_back(mu.space_ptr(), std::move(mass));
  }

  double recomposition = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += lambda[i] * conditionals[i][x];
    recomposition = std::max(recomposition, std::abs(s - mu[x]));
  }
  double rn_key = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& pi_i = mix.component(i);
    double l1 = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      if (pi_i[x] == 0.0) continue;
      l1 += std::abs(lambda[i] * conditionals[i][x] -
                     mix.weights()[i] * f[x] * pi_i[x]);
    }
    rn_key = std::max(rn_key, l1);
  }
  if (recomposition > 1e-12)
    throw InvariantViolation("decompose: recomposition certificate failed",
                             recomposition);
  if (rn_key > 1e-12)
    throw InvariantViolation("decompose: density identity certificate failed",
                             rn_key);
  return {std::move(lambda), std::move(conditionals), std::move(fallbacks),
          recomposition, rn_key};
}

EntropyDecomposition entropy_decomposition(const FiniteMeasure& mu,
                                           const MixtureModel& mix) {
  EntropyDecomposition out;
  out.kl_total = kl_divergence(mu, mix.parent());
  if (!std::isfinite(out.kl_total)) {
    out.finite = false;
    out.kl_weights = kInf;
    out.within_sum = kInf;
    return out;
  }
  const auto dec = decompose(mu, mix);
  out.kl_weights = kl_divergence(dec.lambda_star, mix.weights());
  for (std::size_t i = 0; i < mix.num_components(); ++i) {
    const double l = dec.lambda_star[i];
    if (l == 0.0) continue;
    out.within_sum += l * kl_divergence(dec.conditionals[i], mix.component(i));
  }
  out.residual = std::abs(out.kl_total - out.kl_weights - out.within_sum);
  if (out.residual > 1e-10)
    throw InvariantViolation("entropy decomposition identity failed",
                             out.residual);
  return out;
}

namespace {

double hull_objective(const FiniteMeasure& mu, const MixtureModel& mix,
                      std::span<const double> lambda, std::vector<double>& p) {
  const std::size_t n = mu.size();
  std::fill(p.begin(), p.end(), 0.0);
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (lambda[i] == 0.0) continue;
    const auto& pi_i = mix.component(i);
    for (std::size_t x = 0; x < n; ++x) p[x] += lambda[i] * pi_i[x];
  }
  double s = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    const double t = kl_term(mu[x], p[x]);
    if (t == kInf) return kInf;
    s += t;
  }
  return std::max(s, 0.0);
}

}  // namespace

KlToHullResult kl_to_hull(const FiniteMeasure& mu, const MixtureModel& mix,
                          const KlToHullOptions& options) {
  require_same_space(mu, mix.parent(), "kl_to_hull");
  const std::size_t n = mu.size();
  const std::size_t m = mix.num_components();
  for (std::size_t x = 0; x < n; ++x) {
    if (mu[x] == 0.0) continue;
    bool covered = false;
    for (std::size_t i = 0; i < m && !covered; ++i)
      covered = mix.component(i)[x] > 0.0;
    if (!covered)
      throw SupportError("kl_to_hull: no reweighted mixture covers the measure",
                         x);
  }

  const auto ent = entropy_decomposition(mu, mix);
  auto lambda_star = responsibilities(mu, mix);

  // Starting at lambda* makes the monotone iteration end below
  // KL(mu || sum lambda*_i pi_i), hence below KL(mu||pi) - KL(lambda*||w).
  std::vector<double> lambda(lambda_star.values());
  std::vector<double> p(n), next(m);
  double value = hull_objective(mu, mix, lambda, p);

  KlToHullResult out{FiniteMeasure::on_indices(lambda), value};
  if (options.record_history) out.history.push_back(value);

  long it = 0;
  for (; it < options.max_iterations; ++it) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (lambda[i] == 0.0) {
        next[i] = 0.0;
        continue;
      }
      const auto& pi_i = mix.component(i);
      double g = 0.0;
      for (std::size_t x = 0; x < n; ++x)
        if (mu[x] > 0.0 && pi_i[x] > 0.0) g += mu[x] * pi_i[x] / p[x];
      next[i] = lambda[i] * g;
      total += next[i];
    }
    double move = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      next[i] /= total;
      if (next[i] < 1e-300) next[i] = 0.0;
      move += std::abs(next[i] - lambda[i]);
    }
    lambda.swap(next);
    const double v = hull_objective(mu, mix, lambda, p);
    if (v > value) {
      out.max_increase = std::max(out.max_increase, v - value);
      // increases at the level of summation round-off are not counted
      if (v - value > 64.0 * kEps * (1.0 + value)) out.monotone = false;
    }
    value = v;
    if (options.record_history) out.history.push_back(value);
    if (move < options.tolerance) {
      out.converged = true;
      ++it;
      break;
    }
  }

  double positive_part = 0.0, weighted = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& pi_i = mix.component(i);
    double g = 0.0;
    for (std::size_t x = 0; x < n; ++x)
      if (mu[x] > 0.0 && pi_i[x] > 0.0) g += mu[x] * pi_i[x] / p[x];
    positive_part = std::max(positive_part, g - 1.0);
    weighted += lambda[i] * std::abs(g - 1.0);
  }

  out.lambda_hat = FiniteMeasure::on_indices(std::move(lambda));
  out.value = value;
  out.iterations = it;
  out.kkt_residual = std::max(positive_part, weighted);
  out.rlsi_bound = ent.kl_total - ent.kl_weights;
  out.rlsi_margin = out.rlsi_bound - value;
  return out;
}

std::pair<JointLabeledMeasure, JointLabeledMeasure> lift_joint(
    const FiniteMeasure& mu, const MixtureModel& mix) {
  const auto& pi = mix.parent();
  const auto f = density(mu, pi);
  const std::size_t m = mix.num_components();
  const std::size_t n = mu.size();
  std::vector<double> joint_pi(m * n), joint_mu(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    const double w = mix.weights()[i];
    const auto& pi_i = mix.component(i);
    for (std::size_t x = 0; x < n; ++x) {
      joint_pi[i * n + x] = w * pi_i[x];
      // mu(x) * pi(i | x) = mu(x) * w_i pi_i(x) / pi(x)
      joint_mu[i * n + x] = w * pi_i[x] * f[x];
    }
  }
  return {JointLabeledMeasure(m, n, std::move(joint_pi)),
          JointLabeledMeasure(m, n, std::move(joint_mu))};
}

}  // namespace mixlab
