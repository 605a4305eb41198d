#pragma once

#include <string>
#include <vector>

#include "mixlab/dirichlet.hpp"
#include "mixlab/json_io.hpp"

namespace mixlab {

/// sum_i w_i N(m_i, s_i^2) on the line.
struct GaussianMixture1D {
  std::vector<double> means;
  std::vector<double> variances;  // empty means all 1
  std::vector<double> weights;

  void validate() const;  // throws ConfigError
  std::size_t size() const { return means.size(); }
  double variance(std::size_t i) const { return variances.empty() ? 1.0 : variances[i]; }
  double log_density(double x) const;
  // d/dx log density.
  double score(double x) const;
  double mass_outside(double lo, double hi) const;
  GaussianMixture1D component(std::size_t i) const;
};

struct Grid1D {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n = 3;

  void validate() const;
  double h() const { return (hi - lo) / static_cast<double>(n - 1); }
  double point(std::size_t k) const { return lo + h() * static_cast<double>(k); }
  std::vector<double> points() const;
  Grid1D refined() const { return {lo, hi, 2 * n - 1}; }
  // [min m_i - 8 max s_i, max m_i + 8 max s_i] with n points.
  static Grid1D around(const GaussianMixture1D& g, std::size_t n = 801);
};

struct Discretization {
  ReversibleGenerator generator;
  double mass_leak = 0.0;  // mass of the target outside [lo, hi]
  bool certified = false;  // mass_leak <= 1e-10
  std::string warning;
};

/// Nearest-neighbour chain with Q(x, x +- h) = h^-2 exp(-(V(x +- h) - V(x)) / 2),
/// i.e. conductances h^-2 sqrt(pi(x) pi(x +- h)). `log_weight` holds -V on the
/// grid up to an additive constant.
ReversibleGenerator langevin_chain(const std::vector<double>& log_weight, const Grid1D& grid);
Discretization discretize_langevin(const GaussianMixture1D& target, const Grid1D& grid);
Discretization discretize_potential(const std::vector<double>& potential, const Grid1D& grid);

/// Parent = discretization of the mixture, components = discretizations of
/// each Gaussian. Grid weights are w_i Z_i / Z (Z_i the grid mass of component
/// i) so that the parent is exactly their mixture.
GeneratorMixture discretize_mixture(const GaussianMixture1D& target, const Grid1D& grid,
                                    double* mass_leak = nullptr);

// Grid restriction of a density, renormalized.
FiniteMeasure grid_measure(const GaussianMixture1D& g, const SpacePtr& space,
                           const Grid1D& grid);

struct ContinuumDivergences {
  double kl = 0.0;
  double fi = 0.0;
  double kl_refinement = 0.0;  // |value(grid) - value(refined grid)|
  double fi_refinement = 0.0;
};

/// Composite Simpson quadrature with analytic scores:
/// kl = int log(dmu/dpi) dmu, fi = 1/4 int (d/dx log(dmu/dpi))^2 dmu.
/// Throws PreconditionError if mu leaks more than 1e-10 mass outside the grid.
ContinuumDivergences continuum_divergences(const GaussianMixture1D& mu,
                                           const GaussianMixture1D& pi, const Grid1D& grid);

struct BalCheErdReport {
  double m = 0.0;
  Grid1D grid;
  ContinuumDivergences continuum;
  double grid_kl = 0.0;
  double grid_fi = 0.0;
  std::vector<double> lambda_star;
  double kl_hull = 0.0;
  double w2sq_witness = 0.0;  // W2^2(mu, sum lambda*_i pi_i)
  double mass_leak = 0.0;
  bool kl_hull_ok = false;  // kl_hull <= 2 fi + 1e-9
  bool w2_ok = false;       // w2sq_witness <= 4 fi + 1e-6
  io::Json to_json() const;
};

/// pi = 1/2 N(-m, 1) + 1/2 N(m, 1), mu = 3/4 N(-m, 1) + 1/4 N(m, 1).
BalCheErdReport balcheerd_report(double m, const Grid1D& grid);

void write_sweep_csv(const std::string& path, const io::Stamp& stamp,
                     const std::vector<BalCheErdReport>& rows);

}  // namespace mixlab
