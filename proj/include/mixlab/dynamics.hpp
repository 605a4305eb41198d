#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixlab/dirichlet.hpp"
#include "mixlab/json_io.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/report.hpp"

namespace mixlab {

/// exp(tL)^T acting on measures. Dense symmetric eigendecomposition of
/// D^{1/2} L D^{-1/2} on the support for n <= dense_limit, uniformization
/// otherwise.
class Propagator {
 public:
  explicit Propagator(const ReversibleGenerator& gen, std::size_t dense_limit = 4000);

  // Law at time t. `drift` receives |mass - 1| before renormalization.
  FiniteMeasure at(const FiniteMeasure& mu0, double t, double* drift = nullptr) const;
  // (1/t) int_0^t mu_s ds, exact in the eigenbasis.
  std::vector<double> time_averaged_law(const FiniteMeasure& mu0, double t) const;
  bool dense() const { return dense_; }

 private:
  std::vector<double> eigen_apply(const FiniteMeasure& mu0, double t, bool average) const;
  std::vector<double> uniformized(const FiniteMeasure& mu0, double t) const;

  const ReversibleGenerator* gen_;
  bool dense_;
  std::vector<std::size_t> index_;
  Eigen::VectorXd sqrt_pi_;
  Eigen::VectorXd eigenvalues_;  // of -L, ascending
  Eigen::MatrixXd eigenvectors_;
};

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<FiniteMeasure> states;
  std::vector<double> kl_t;
  std::vector<double> fi_t;
  std::vector<double> ep_t;
  // Filled only when a GeneratorMixture is supplied.
  bool has_mixture = false;
  std::vector<FiniteMeasure> lambda_t;
  std::vector<double> kl_hull_t;
  std::vector<double> kl_weights_t;
  std::vector<double> delta_t;
  double max_renormalization = 0.0;
};

/// `times` increasing and starting at 0.
EvolutionTrace evolve(const ReversibleGenerator& gen, const FiniteMeasure& mu0,
                      std::span<const double> times,
                      const GeneratorMixture* mixture = nullptr);

std::vector<double> uniform_times(double horizon, std::size_t steps);

void write_trace_csv(const std::string& path, const io::Stamp& stamp,
                     const EvolutionTrace& trace);

// Centered-difference residual (kl_{k+1} - kl_{k-1}) / (t_{k+1} - t_{k-1}) + ep_k
// at each interior grid point k = 1..N-2.
std::vector<double> dissipation_residuals(const EvolutionTrace& trace);

// Cumulative int_0^{t_k} FI(mu_s||pi) ds by adaptive Simpson on the exact
// propagator; `tolerance` is per output interval.
std::vector<double> integrated_fisher(const ReversibleGenerator& gen, const FiniteMeasure& mu0,
                                      std::span<const double> times, double tolerance = 1e-13);

/// (a) centered differences of kl against -ep, tolerance
///     (dt^2/6) * 2 max|kl'''| + 1e-9 with kl''' = -ep'' estimated by second
///     differences; (b) (1/t) int_0^t FI <= KL(mu_0||pi) / (4t) at every grid
///     time t > 0, with the integral from integrated_fisher. Requires a uniform grid with step <= 0.1/gap.
std::vector<InequalityReport> dissipation_check(const EvolutionTrace& trace,
                                                const ReversibleGenerator& gen);

/// At every grid time: KL(mu_t||hull) <= exp(-t/C') KL(mu_0||pi) + delta(t) and
/// KL(mu_t||pi) <= exp(-t/C') KL(mu_0||pi) + eta(t), eta = max_{s<=t} kl_weights_s.
/// Each report carries the worst grid time.
std::vector<InequalityReport> metastability_report(const EvolutionTrace& trace,
                                                   const GeneratorMixture& gm,
                                                   double C_prime,
                                                   Provenance provenance);

struct TrajectoryBatch {
  std::uint64_t seed = 0;
  std::size_t count = 0;
  double horizon = 0.0;
  std::vector<double> time_averages;

  double mean() const;
  double standard_error() const;
};

/// Gillespie simulation; trajectory k draws from CounterRng::stream(seed, k)
/// so the parallel and serial paths agree bit for bit.
TrajectoryBatch simulate_time_average(const ReversibleGenerator& gen,
                                      const FiniteMeasure& mu0, std::span<const double> f,
                                      double horizon, std::size_t count,
                                      std::uint64_t seed,
                                      Policy policy = Policy::parallel);

// E[(1/t) int_0^t f(X_s) ds] from the propagator.
double expected_time_average(const Propagator& prop, const FiniteMeasure& mu0,
                             std::span<const double> f, double horizon);

struct ThresholdRow {
  double r = 0.0;
  double level = 0.0;  // max_i pi_i(f) + r
  double empirical = 0.0;
  double bound = 0.0;
  double slack = 0.0;  // 3 SE + 1/count
  bool pass = false;
};

struct ConcentrationReport {
  double lipschitz = 0.0;
  double l2_density = 0.0;  // ||dmu0/dpi||_{L2(pi)}
  double max_component_mean = 0.0;
  double conjugate_level = 0.0;  // -min_i pi_i(f^c) for the metric cost
  double C = 0.0;
  Provenance C_provenance = Provenance::estimated;
  double horizon = 0.0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::vector<ThresholdRow> rows;
  bool pass() const;
  io::Json to_json() const;
};

/// Probed W1-TI constant: max over random nu of W1(nu, hull) / (2 sqrt(FI(nu||pi))),
/// half Dirichlet draws and half reweighted mixtures with multiplicative noise.
double probe_w1_constant(const GeneratorMixture& gm, int probes, std::uint64_t seed,
                         Policy policy = Policy::parallel);

ConcentrationReport concentration_experiment(const GeneratorMixture& gm,
                                             const FiniteMeasure& mu0,
                                             std::span<const double> f, double horizon,
                                             std::size_t count, std::uint64_t seed, double C,
                                             Provenance C_provenance,
                                             std::vector<double> thresholds = {},
                                             Policy policy = Policy::parallel);

}  // namespace mixlab
