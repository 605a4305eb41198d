#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mixlab/continuum1d.hpp"
#include "mixlab/error.hpp"

using namespace mixlab;

namespace {

GaussianMixture1D gaussian(double m, double v = 1.0) { return {{m}, {v}, {1.0}}; }

}  // namespace

TEST_CASE("continuum divergences vanish for identical measures") {
  const GaussianMixture1D pi{{-2.0, 1.5}, {1.0, 0.5}, {0.3, 0.7}};
  const auto d = continuum_divergences(pi, pi, Grid1D::around(pi, 401));
  CHECK(std::abs(d.kl) < 1e-12);
  CHECK(std::abs(d.fi) < 1e-12);
}

TEST_CASE("gaussian shift closed forms") {
  for (double b : {0.3, 1.0, 2.5}) {
    const auto mu = gaussian(0.0), pi = gaussian(b);
    const Grid1D grid{-10.0, 10.0 + b, 801};
    const auto d = continuum_divergences(mu, pi, grid);
    CHECK(std::abs(d.kl - b * b / 2.0) < 1e-9);
    CHECK(std::abs(d.fi - b * b / 4.0) < 1e-9);
    CHECK(d.kl_refinement < 1e-9);
  }
}

TEST_CASE("continuum divergences are translation invariant") {
  const GaussianMixture1D mu{{-1.0, 2.0}, {1.0, 0.7}, {0.6, 0.4}};
  const GaussianMixture1D pi{{-1.5, 1.0}, {1.2, 1.0}, {0.5, 0.5}};
  auto shift = [](GaussianMixture1D g, double s) {
    for (auto& m : g.means) m += s;
    return g;
  };
  const Grid1D grid{-14.0, 14.0, 1201};
  const Grid1D moved{-14.0 + 3.7, 14.0 + 3.7, 1201};
  const auto a = continuum_divergences(mu, pi, grid);
  const auto b = continuum_divergences(shift(mu, 3.7), shift(pi, 3.7), moved);
  CHECK(std::abs(a.kl - b.kl) < 1e-10);
  CHECK(std::abs(a.fi - b.fi) < 1e-10);
}

TEST_CASE("small quadrature window is a precondition error") {
  CHECK_THROWS_AS(continuum_divergences(gaussian(0.0), gaussian(1.0), Grid1D{-2.0, 2.0, 101}),
                  PreconditionError);
}

TEST_CASE("discretized gaussian has the grid-normalized gaussian as stationary measure") {
  const Grid1D grid{-8.0, 8.0, 161};
  const auto d = discretize_langevin(gaussian(0.0), grid);
  CHECK(d.certified);
  double z = 0.0;
  std::vector<double> ref(grid.n);
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double x = grid.point(k);
    ref[k] = std::exp(-x * x / 2.0);
    z += ref[k];
  }
  for (std::size_t k = 0; k < grid.n; ++k)
    CHECK(std::abs(d.generator.stationary()[k] - ref[k] / z) < 1e-15);
  CHECK(d.generator.detailed_balance_residual() < 1e-12);
  for (const auto& e : d.generator.edges()) {
    const double x = grid.point(e.x), y = grid.point(e.y);
    const double rate = std::exp(-(y * y - x * x) / 4.0) / (grid.h() * grid.h());
    CHECK(std::abs(d.generator.rate(e.x, e.y) - rate) < 1e-9 * rate);
  }
}

TEST_CASE("leaky grid carries a warning") {
  const auto d = discretize_langevin(gaussian(0.0), Grid1D{-3.0, 3.0, 61});
  CHECK_FALSE(d.certified);
  CHECK_FALSE(d.warning.empty());
}

TEST_CASE("Ornstein-Uhlenbeck gap of the discretized chain extrapolates to 1") {
  std::vector<double> gaps;
  for (double h : {0.1, 0.05, 0.025}) {
    const auto n = static_cast<std::size_t>(std::lround(16.0 / h)) + 1;
    gaps.push_back(spectral_gap(discretize_langevin(gaussian(0.0), Grid1D{-8.0, 8.0, n}).generator));
  }
  // Error is O(h^2): two Richardson levels.
  const double r1 = (4.0 * gaps[1] - gaps[0]) / 3.0;
  const double r2 = (4.0 * gaps[2] - gaps[1]) / 3.0;
  const double r = (16.0 * r2 - r1) / 15.0;
  CHECK(std::abs(r - 1.0) < 0.02);
  CHECK(std::abs(gaps[2] - 1.0) < std::abs(gaps[0] - 1.0));
}

TEST_CASE("mixture discretization satisfies per-edge Cauchy-Schwarz") {
  const GaussianMixture1D g{{-3.0, 0.5, 4.0}, {1.0, 0.5, 2.0}, {0.2, 0.5, 0.3}};
  const auto gm = discretize_mixture(g, Grid1D::around(g, 401));
  const auto rep = check_assumption(gm);
  CHECK(rep.pointwise_ok);
  CHECK(rep.psd_ok);
  for (const auto& e : gm.parent.edges()) {
    double sum = 0.0, a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < gm.components.size(); ++i) {
      const double w = gm.mix.weights()[i];
      const auto& pi = gm.components[i].stationary();
      sum += w * std::sqrt(pi[e.x] * pi[e.y]);
      a += w * pi[e.x];
      b += w * pi[e.y];
    }
    CHECK(sum <= std::sqrt(a * b) * (1.0 + 1e-12));
  }
}

TEST_CASE("grid Fisher information approaches the continuum value") {
  const auto mu = gaussian(0.0), pi = gaussian(0.5);
  const double exact = 0.0625;
  double prev = INFINITY;
  for (std::size_t n : {101, 201, 401, 801}) {
    const Grid1D grid{-9.0, 9.5, n};
    const auto gen = discretize_langevin(pi, grid).generator;
    const auto mu_hat = grid_measure(mu, gen.space_ptr(), grid);
    const double err = std::abs(fisher_information(mu_hat, gen) - exact);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-3 * exact);
}

TEST_CASE("balcheerd example at m = 4") {
  const auto rep = balcheerd_report(4.0, Grid1D{-12.0, 12.0, 801});
  const double target = 0.75 * std::log(1.5) + 0.25 * std::log(0.5);
  CHECK(std::abs(rep.continuum.kl - target) < 1e-3);
  CHECK(rep.continuum.fi <= 1e-3);
  CHECK(std::abs(rep.lambda_star[0] - 0.75) < 1e-3);
  CHECK(std::abs(rep.lambda_star[1] - 0.25) < 1e-3);
  CHECK(rep.kl_hull_ok);
  CHECK(rep.w2_ok);
  CHECK(rep.continuum.kl_refinement < 1e-4);
  CHECK(rep.continuum.fi_refinement < 1e-4);
}

TEST_CASE("balcheerd degenerate m = 0") {
  const auto rep = balcheerd_report(0.0, Grid1D{-9.0, 9.0, 401});
  CHECK(std::abs(rep.lambda_star[0] - 0.5) < 1e-12);
  CHECK(rep.kl_hull < 1e-12);
  CHECK(std::abs(rep.continuum.kl) < 1e-12);
}

TEST_CASE("balcheerd Fisher information decreases in m") {
  double prev = INFINITY;
  for (double m : {2.0, 3.0, 4.0, 5.0}) {
    const auto rep = balcheerd_report(m, Grid1D{-m - 8.0, m + 8.0, 801});
    CHECK(rep.continuum.fi < prev);
    CHECK(rep.kl_hull_ok);
    prev = rep.continuum.fi;
  }
}
