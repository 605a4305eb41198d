#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mixlab/measure.hpp"
#include "mixlab/parallel.hpp"

namespace mixlab {

// Undirected edge with conductance c(x, y) = pi(x) Q(x, y), stored with x < y.
struct Edge {
  std::size_t x;
  std::size_t y;
  double c;
};

/// Reversible Markov generator held in edge-conductance form. Rates are derived
/// as Q(x, y) = c(x, y) / pi(x), so detailed balance holds by construction.
///
/// The stationary measure may vanish outside a support set (conditioned
/// components); edges must stay inside the support. `irreducible()` reports
/// whether the conductance graph is connected on the support; operations that
/// need ergodicity check it.
class ReversibleGenerator {
 public:
  static ReversibleGenerator from_conductances(FiniteMeasure stationary,
                                               std::vector<Edge> edges);
  // `rates` is row-major n x n. The diagonal is ignored except for a
  // consistency check when it is nonzero. Without `stationary` the measure is
  // solved for along a spanning tree and then certified.
  static ReversibleGenerator from_rates(SpacePtr space,
                                        const std::vector<double>& rates,
                                        std::optional<FiniteMeasure> stationary = {});

  const FiniteMeasure& stationary() const { return stationary_; }
  const StateSpace& space() const { return stationary_.space(); }
  const SpacePtr& space_ptr() const { return stationary_.space_ptr(); }
  std::size_t size() const { return stationary_.size(); }

  const std::vector<Edge>& edges() const { return edges_; }
  bool irreducible() const { return irreducible_; }
  bool in_support(std::size_t x) const { return stationary_[x] > 0.0; }
  std::size_t support_size() const { return support_size_; }

  double conductance(std::size_t x, std::size_t y) const;
  double rate(std::size_t x, std::size_t y) const;
  double exit_rate(std::size_t x) const { return exit_rate_[x]; }
  double max_exit_rate() const;

  // Neighbours of x with their conductances.
  std::span<const std::size_t> neighbours(std::size_t x) const {
    return {adj_target_.data() + adj_offset_[x],
            adj_offset_[x + 1] - adj_offset_[x]};
  }
  std::span<const double> neighbour_conductances(std::size_t x) const {
    return {adj_c_.data() + adj_offset_[x], adj_offset_[x + 1] - adj_offset_[x]};
  }

  // (L f)(x) = sum_y Q(x, y) (f(y) - f(x)); zero off the support.
  std::vector<double> apply(std::span<const double> f) const;
  std::vector<double> dense_rates() const;

  // max |pi(x)Q(x,y) - pi(y)Q(y,x)| / max(.,.) over edges of the derived rates.
  double detailed_balance_residual() const;

 private:
  ReversibleGenerator(FiniteMeasure stationary, std::vector<Edge> edges);

  FiniteMeasure stationary_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> adj_offset_;
  std::vector<std::size_t> adj_target_;
  std::vector<double> adj_c_;
  std::vector<double> exit_rate_;
  std::size_t support_size_ = 0;
  bool irreducible_ = false;
};

/// Mixture plus per-component generators and the parent generator.
struct GeneratorMixture {
  GeneratorMixture(MixtureModel mix, std::vector<ReversibleGenerator> components,
                   ReversibleGenerator parent);

  MixtureModel mix;
  std::vector<ReversibleGenerator> components;
  ReversibleGenerator parent;
};

double dirichlet_form(const ReversibleGenerator& gen, std::span<const double> f,
                      std::span<const double> g);
// -sum_x pi(x) f(x) (L g)(x), the generator route used to cross-check.
double dirichlet_form_generator_route(const ReversibleGenerator& gen,
                                      std::span<const double> f,
                                      std::span<const double> g);

double fisher_information(const FiniteMeasure& mu, const ReversibleGenerator& gen);
double entropy_production(const FiniteMeasure& mu, const ReversibleGenerator& gen);

struct AssumptionReport {
  bool pointwise_ok = false;
  bool psd_ok = false;
  bool entropy_form_ok = false;
  double min_slack = 0.0;
  std::size_t worst_x = 0, worst_y = 0;
  std::optional<double> min_eigenvalue;  // only when the PSD fallback ran
  int entropy_form_samples = 0;
  double entropy_form_worst_margin = 0.0;
};

struct AssumptionOptions {
  std::uint64_t seed = 1;
  int samples = 1000;
};

AssumptionReport check_assumption(const GeneratorMixture& gm,
                                  const AssumptionOptions& options = {});

/// Matrix of -L in L2(pi) restricted to the support, symmetrized:
/// D^{1/2} (-L) D^{-1/2}. `support_index` receives the state of each row.
Eigen::MatrixXd symmetrized_negative_generator(
    const ReversibleGenerator& gen, std::vector<std::size_t>* support_index = nullptr);

struct SpectralGap {
  double gap = 0.0;
  std::vector<double> eigenfunction;  // L2(pi)-normalized, on all states
};

SpectralGap spectral_gap_with_eigenfunction(const ReversibleGenerator& gen);
double spectral_gap(const ReversibleGenerator& gen);

double reweighted_poincare_residual(std::span<const double> g,
                                    const GeneratorMixture& gm);
double variance(const FiniteMeasure& pi, std::span<const double> g);

enum class LsiMode { lsi, mlsi };

struct LsiEstimateOptions {
  std::uint64_t seed = 7;
  int random_starts = 32;
  int concentrated_starts = 8;
  long max_iterations = 10000;
  Policy policy = Policy::parallel;
};

struct LsiEstimate {
  double lower_bound = 0.0;
  FiniteMeasure witness;
  LsiMode mode;
  int starts = 0;
};

// KL / FI (lsi) or KL / entropy production (mlsi) at a feasible measure.
double lsi_ratio(const FiniteMeasure& mu, const ReversibleGenerator& gen,
                 LsiMode mode);

/// Lower bound on the (M)LSI constant from multi-start mirror ascent. Each
/// evaluated ratio is attained by a feasible measure.
LsiEstimate estimate_lsi_constant(const ReversibleGenerator& gen, LsiMode mode,
                                  const LsiEstimateOptions& options = {});

}  // namespace mixlab
