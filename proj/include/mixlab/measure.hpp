#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mixlab {

/// A finite state space, optionally carrying labels, 1D coordinates and a
/// metric. Shared between all measures defined on it.
class StateSpace {
 public:
  struct Options {
    std::vector<std::string> labels;
    std::vector<double> coords;
    std::vector<double> metric;  // row-major size x size
  };

  static std::shared_ptr<const StateSpace> make(std::size_t size,
                                                Options options = {});
  // Space with 1D coordinates and the induced line metric |x - y|.
  static std::shared_ptr<const StateSpace> line(std::vector<double> coords);
  // Index set [m], used for mixture weights and responsibilities.
  static std::shared_ptr<const StateSpace> indices(std::size_t m);

  std::size_t size() const { return size_; }
  bool has_coords() const { return !coords_.empty(); }
  bool has_metric() const { return !metric_.empty(); }
  bool has_labels() const { return !labels_.empty(); }

  std::span<const double> coords() const { return coords_; }
  const std::vector<std::string>& labels() const { return labels_; }
  double metric(std::size_t x, std::size_t y) const {
    return metric_[x * size_ + y];
  }
  std::span<const double> metric_matrix() const { return metric_; }

  bool structurally_equal(const StateSpace& other) const;

 private:
  StateSpace() = default;

  std::size_t size_ = 0;
  std::vector<std::string> labels_;
  std::vector<double> coords_;
  std::vector<double> metric_;
};

using SpacePtr = std::shared_ptr<const StateSpace>;

/// Probability vector on a StateSpace. The total mass is renormalized at
/// construction; the size of that correction is kept for auditing.
class FiniteMeasure {
 public:
  FiniteMeasure(SpacePtr space, std::vector<double> mass);

  static FiniteMeasure on_indices(std::vector<double> mass);
  static FiniteMeasure uniform(SpacePtr space);
  static FiniteMeasure point_mass(SpacePtr space, std::size_t x);

  const StateSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  std::size_t size() const { return mass_.size(); }

  double operator[](std::size_t x) const { return mass_[x]; }
  std::span<const double> mass() const { return mass_; }
  const std::vector<double>& values() const { return mass_; }

  // |sum(input) - 1| before renormalization.
  double normalization_correction() const { return correction_; }

  double expectation(std::span<const double> f) const;

 private:
  SpacePtr space_;
  std::vector<double> mass_;
  double correction_ = 0.0;
};

bool same_space(const FiniteMeasure& a, const FiniteMeasure& b);
void require_same_space(const FiniteMeasure& a, const FiniteMeasure& b,
                        const char* op);

/// Components pi_i on a shared space, strictly positive weights w, and the
/// parent pi = sum_i w_i pi_i.
class MixtureModel {
 public:
  MixtureModel(std::vector<FiniteMeasure> components, FiniteMeasure weights);
  // Also checks that `parent` equals the weighted sum entrywise within 1e-12.
  MixtureModel(std::vector<FiniteMeasure> components, FiniteMeasure weights,
               const FiniteMeasure& parent);

  std::size_t num_components() const { return components_.size(); }
  std::size_t num_states() const { return parent_.size(); }
  const SpacePtr& space_ptr() const { return parent_.space_ptr(); }

  const std::vector<FiniteMeasure>& components() const { return components_; }
  const FiniteMeasure& component(std::size_t i) const { return components_[i]; }
  const FiniteMeasure& weights() const { return weights_; }
  const FiniteMeasure& parent() const { return parent_; }

  // sum_i lambda_i pi_i for lambda in the simplex.
  FiniteMeasure reweighted(const FiniteMeasure& lambda) const;

 private:
  std::vector<FiniteMeasure> components_;
  FiniteMeasure weights_;
  FiniteMeasure parent_;
};

struct ResponsibilityDecomposition {
  FiniteMeasure lambda_star;
  std::vector<FiniteMeasure> conditionals;
  std::vector<std::size_t> zero_mass_fallbacks;
  double recomposition_residual = 0.0;  // max_x |sum_i l_i mu_i(x) - mu(x)|
  double rn_key_residual = 0.0;         // max_i L1(pi_i) norm of the identity
};

struct EntropyDecomposition {
  double kl_total = 0.0;
  double kl_weights = 0.0;
  double within_sum = 0.0;
  double residual = 0.0;  // |kl_total - kl_weights - within_sum|
  bool finite = true;
};

struct KlToHullOptions {
  double tolerance = 1e-10;   // l1 move of the iterate
  long max_iterations = 100000;
  bool record_history = false;
};

struct KlToHullResult {
  FiniteMeasure lambda_hat;
  double value = 0.0;
  long iterations = 0;
  bool converged = false;
  bool monotone = true;  // no increase beyond 64 ulp of the objective
  double max_increase = 0.0;
  // max_i (g_i - 1)^+ together with sum_i lambda_i |g_i - 1|, where g is the
  // negative gradient of the objective in lambda.
  double kkt_residual = 0.0;
  // KL(mu||pi) - KL(lambda*||w) and the margin of value against it.
  double rlsi_bound = 0.0;
  double rlsi_margin = 0.0;
  std::vector<double> history;
};

/// Labeled lift on [m] x states, row-major (index, state).
class JointLabeledMeasure {
 public:
  JointLabeledMeasure(std::size_t m, std::size_t n, std::vector<double> mass);

  std::size_t num_indices() const { return m_; }
  std::size_t num_states() const { return n_; }
  double operator()(std::size_t i, std::size_t x) const {
    return mass_[i * n_ + x];
  }
  std::vector<double> index_marginal() const;
  std::vector<double> state_marginal() const;
  // Conditional law of the state given index i; empty if the index has no mass.
  std::vector<double> conditional(std::size_t i) const;

 private:
  std::size_t m_, n_;
  std::vector<double> mass_;
};

/// KL(mu||nu), +inf on support violation. Throws DimensionError.
double kl_divergence(const FiniteMeasure& mu, const FiniteMeasure& nu);
double tv_distance(const FiniteMeasure& mu, const FiniteMeasure& nu);

/// dmu/dnu on the support of nu (0 elsewhere); throws SupportError if mu has
/// mass outside it.
std::vector<double> density(const FiniteMeasure& mu, const FiniteMeasure& nu);

FiniteMeasure responsibilities(const FiniteMeasure& mu, const MixtureModel& mix);
ResponsibilityDecomposition decompose(const FiniteMeasure& mu,
                                      const MixtureModel& mix);
EntropyDecomposition entropy_decomposition(const FiniteMeasure& mu,
                                           const MixtureModel& mix);
KlToHullResult kl_to_hull(const FiniteMeasure& mu, const MixtureModel& mix,
                          const KlToHullOptions& options = {});
std::pair<JointLabeledMeasure, JointLabeledMeasure> lift_joint(
    const FiniteMeasure& mu, const MixtureModel& mix);

}  // namespace mixlab
