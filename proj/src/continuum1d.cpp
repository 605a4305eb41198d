#include "mixlab/continuum1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mixlab/error.hpp"
#include "mixlab/transport.hpp"

namespace mixlab {

namespace {

constexpr double kLeakTol = 1e-10;

double logsumexp(const std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

double upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

}  // namespace

void GaussianMixture1D::validate() const {
  if (means.empty()) throw ConfigError("Gaussian mixture needs at least one mean");
  if (weights.size() != means.size())
    throw ConfigError("Gaussian mixture: weights and means differ in length");
  if (!variances.empty() && variances.size() != means.size())
    throw ConfigError("Gaussian mixture: variances and means differ in length");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w))
      throw ConfigError("Gaussian mixture weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ConfigError("Gaussian mixture weights must sum to 1");
  for (double v : variances)
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError("Gaussian mixture variances must be positive");
  for (double m : means)
    if (!std::isfinite(m)) throw ConfigError("Gaussian mixture means must be finite");
}

double GaussianMixture1D::log_density(double x) const {
  std::vector<double> terms(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const double v = variance(i);
    const double d = x - means[i];
    terms[i] = std::log(weights[i]) - 0.5 * d * d / v - 0.5 * std::log(2.0 * std::numbers::pi * v);
  }
  return logsumexp(terms);
}

double GaussianMixture1D::score(double x) const {
  std::vector<double> terms(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const double v = variance(i);
    const double d = x - means[i];
    terms[i] = std::log(weights[i]) - 0.5 * d * d / v - 0.5 * std::log(2.0 * std::numbers::pi * v);
  }
  const double lse = logsumexp(terms);
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    s += std::exp(terms[i] - lse) * (-(x - means[i]) / variance(i));
  return s;
}

double GaussianMixture1D::mass_outside(double lo, double hi) const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const double sd = std::sqrt(variance(i));
    s += weights[i] * (upper_tail((means[i] - lo) / sd) + upper_tail((hi - means[i]) / sd));
  }
  return s;
}

GaussianMixture1D GaussianMixture1D::component(std::size_t i) const {
  return {{means[i]}, {variance(i)}, {1.0}};
}

void Grid1D::validate() const {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw ConfigError("grid needs finite lo < hi");
  if (n < 3) throw ConfigError("grid needs at least 3 points");
}

std::vector<double> Grid1D::points() const {
  std::vector<double> p(n);
  for (std::size_t k = 0; k < n; ++k) p[k] = point(k);
  p.back() = hi;
  return p;
}

Grid1D Grid1D::around(const GaussianMixture1D& g, std::size_t n) {
  g.validate();
  double sd = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) sd = std::max(sd, std::sqrt(g.variance(i)));
  const auto [mn, mx] = std::minmax_element(g.means.begin(), g.means.end());
  return {*mn - 8.0 * sd, *mx + 8.0 * sd, n};
}

ReversibleGenerator langevin_chain(const std::vector<double>& log_weight, const Grid1D& grid) {
  grid.validate();
  if (log_weight.size() != grid.n) throw DimensionError("potential table does not match grid");
  const double norm = logsumexp(log_weight);
  std::vector<double> pi(grid.n);
  for (std::size_t k = 0; k < grid.n; ++k) pi[k] = std::exp(log_weight[k] - norm);
  const auto pts = grid.points();
  auto space = StateSpace::line(pts);
  FiniteMeasure stationary(space, std::move(pi));
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  std::vector<Edge> edges;
  for (std::size_t k = 0; k + 1 < grid.n; ++k) {
    if (stationary[k] == 0.0 || stationary[k + 1] == 0.0) continue;
    const double c = inv_h2 * std::exp(0.5 * (log_weight[k] + log_weight[k + 1]) - norm);
    edges.push_back({k, k + 1, c});
  }
  return ReversibleGenerator::from_conductances(std::move(stationary), std::move(edges));
}

Discretization discretize_langevin(const GaussianMixture1D& target, const Grid1D& grid) {
  target.validate();
  grid.validate();
  std::vector<double> lw(grid.n);
  for (std::size_t k = 0; k < grid.n; ++k) lw[k] = target.log_density(grid.point(k));
  Discretization d{langevin_chain(lw, grid)};
  d.mass_leak = target.mass_outside(grid.lo, grid.hi);
  d.certified = d.mass_leak <= kLeakTol;
  if (!d.certified)
    d.warning = "grid mass leak " + io::format_double(d.mass_leak) + " exceeds 1e-10";
  return d;
}

Discretization discretize_potential(const std::vector<double>& potential, const Grid1D& grid) {
  std::vector<double> lw(potential.size());
  for (std::size_t k = 0; k < lw.size(); ++k) {
    if (!std::isfinite(potential[k])) throw ConfigError("potential table has a non-finite entry");
    lw[k] = -potential[k];
  }
  Discretization d{langevin_chain(lw, grid)};
  // Boundary density relative to the peak as the leak proxy for tabulated potentials.
  const double mx = *std::max_element(lw.begin(), lw.end());
  d.mass_leak = std::exp(std::max(lw.front(), lw.back()) - mx);
  d.certified = d.mass_leak <= kLeakTol;
  if (!d.certified)
    d.warning = "boundary density ratio " + io::format_double(d.mass_leak) + " exceeds 1e-10";
  return d;
}

GeneratorMixture discretize_mixture(const GaussianMixture1D& target, const Grid1D& grid,
                                    double* mass_leak) {
  target.validate();
  grid.validate();
  const std::size_t m = target.size();
  std::vector<ReversibleGenerator> comps;
  std::vector<FiniteMeasure> measures;
  std::vector<double> log_z(m);
  std::vector<double> lw(grid.n);
  for (std::size_t i = 0; i < m; ++i) {
    const auto ci = target.component(i);
    for (std::size_t k = 0; k < grid.n; ++k) lw[k] = ci.log_density(grid.point(k));
    log_z[i] = logsumexp(lw);
    comps.push_back(langevin_chain(lw, grid));
  }
  // All components must share one space object with the parent.
  auto parent = discretize_langevin(target, grid);
  if (mass_leak) *mass_leak = parent.mass_leak;
  const auto& space = parent.generator.space_ptr();
  std::vector<ReversibleGenerator> shared;
  for (auto& c : comps) {
    shared.push_back(ReversibleGenerator::from_conductances(
        FiniteMeasure(space, c.stationary().values()), c.edges()));
    measures.push_back(shared.back().stationary());
  }
  std::vector<double> lwz(m);
  for (std::size_t i = 0; i < m; ++i) lwz[i] = std::log(target.weights[i]) + log_z[i];
  const double lse = logsumexp(lwz);
  std::vector<double> w(m);
  for (std::size_t i = 0; i < m; ++i) w[i] = std::exp(lwz[i] - lse);

  // The weighted component sum is the parent up to rounding; rebuild the
  // parent on that exact measure so the mixture identity holds to 1e-12.
  MixtureModel mix(std::move(measures), FiniteMeasure::on_indices(std::move(w)));
  auto parent_gen = ReversibleGenerator::from_conductances(mix.parent(), parent.generator.edges());
  return GeneratorMixture(std::move(mix), std::move(shared), std::move(parent_gen));
}

FiniteMeasure grid_measure(const GaussianMixture1D& g, const SpacePtr& space, const Grid1D& grid) {
  std::vector<double> lw(grid.n);
  for (std::size_t k = 0; k < grid.n; ++k) lw[k] = g.log_density(grid.point(k));
  const double lse = logsumexp(lw);
  for (auto& v : lw) v = std::exp(v - lse);
  return FiniteMeasure(space, std::move(lw));
}

namespace {

ContinuumDivergences simpson(const GaussianMixture1D& mu, const GaussianMixture1D& pi,
                             const Grid1D& grid) {
  Grid1D g = grid;
  if (g.n % 2 == 0) ++g.n;
  const double h = g.h();
  double kl = 0.0, fi = 0.0;
  for (std::size_t k = 0; k < g.n; ++k) {
    const double x = g.point(k);
    const double lm = mu.log_density(x), lp = pi.log_density(x);
    const double dens = std::exp(lm);
    const double ds = mu.score(x) - pi.score(x);
    const double w = (k == 0 || k + 1 == g.n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    kl += w * dens * (lm - lp);
    fi += w * dens * ds * ds;
  }
  return {kl * h / 3.0, 0.25 * fi * h / 3.0};
}

}  // namespace

ContinuumDivergences continuum_divergences(const GaussianMixture1D& mu,
                                           const GaussianMixture1D& pi, const Grid1D& grid) {
  mu.validate();
  pi.validate();
  grid.validate();
  const double leak = mu.mass_outside(grid.lo, grid.hi);
  if (leak > kLeakTol)
    throw PreconditionError("continuum_divergences: quadrature window leaks " +
                            io::format_double(leak) + " of mu's mass");
  auto coarse = simpson(mu, pi, grid);
  const auto fine = simpson(mu, pi, grid.refined());
  coarse.kl_refinement = std::abs(fine.kl - coarse.kl);
  coarse.fi_refinement = std::abs(fine.fi - coarse.fi);
  coarse.kl = fine.kl;
  coarse.fi = fine.fi;
  return coarse;
}

io::Json BalCheErdReport::to_json() const {
  return {{"m", m},
          {"grid", {{"lo", grid.lo}, {"hi", grid.hi}, {"n", grid.n}}},
          {"kl", continuum.kl},
          {"fi", continuum.fi},
          {"kl_refinement", continuum.kl_refinement},
          {"fi_refinement", continuum.fi_refinement},
          {"grid_kl", grid_kl},
          {"grid_fi", grid_fi},
          {"lambda_star", lambda_star},
          {"kl_hull", kl_hull},
          {"w2sq_witness", w2sq_witness},
          {"mass_leak", mass_leak},
          {"kl_hull_ok", kl_hull_ok},
          {"w2_ok", w2_ok}};
}

BalCheErdReport balcheerd_report(double m, const Grid1D& grid) {
  if (!(m >= 0.0)) throw ConfigError("balcheerd: m must be nonnegative");
  grid.validate();
  const GaussianMixture1D pi{{-m, m}, {}, {0.5, 0.5}};
  const GaussianMixture1D mu{{-m, m}, {}, {0.75, 0.25}};

  BalCheErdReport rep;
  rep.m = m;
  rep.grid = grid;
  rep.continuum = continuum_divergences(mu, pi, grid);

  const auto gm = discretize_mixture(pi, grid, &rep.mass_leak);
  if (rep.mass_leak > kLeakTol)
    throw PreconditionError("balcheerd: grid leaks " + io::format_double(rep.mass_leak) +
                            " of pi's mass");
  const auto mu_hat = grid_measure(mu, gm.parent.space_ptr(), grid);
  rep.grid_kl = kl_divergence(mu_hat, gm.mix.parent());
  rep.grid_fi = fisher_information(mu_hat, gm.parent);
  const auto lam = responsibilities(mu_hat, gm.mix);
  rep.lambda_star = lam.values();
  rep.kl_hull = kl_to_hull(mu_hat, gm.mix).value;
  rep.w2sq_witness = w2_1d(mu_hat, gm.mix.reweighted(lam));
  rep.kl_hull_ok = rep.kl_hull <= 2.0 * rep.continuum.fi + 1e-9;
  rep.w2_ok = rep.w2sq_witness <= 4.0 * rep.continuum.fi + 1e-6;
  return rep;
}

void write_sweep_csv(const std::string& path, const io::Stamp& stamp,
                     const std::vector<BalCheErdReport>& rows) {
  io::CsvWriter csv(path, stamp, {"m", "kl", "fi", "lambda1", "lambda2", "kl_hull", "w2sq_hull"});
  for (const auto& r : rows)
    csv.row({r.m, r.continuum.kl, r.continuum.fi, r.lambda_star.at(0), r.lambda_star.at(1),
             r.kl_hull, r.w2sq_witness});
}

}  // namespace mixlab
