#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "doctest.h"
#include "mixlab/dirichlet.hpp"
#include "mixlab/error.hpp"
#include "support.hpp"

using namespace mixlab;

namespace {

ReversibleGenerator two_point(double a, double b) {
  return ReversibleGenerator::from_rates(StateSpace::make(2), {0, a, b, 0});
}

// Random irreducible generator: spanning path plus extra random edges.
ReversibleGenerator random_generator(CounterRng& rng, std::size_t n) {
  auto space = StateSpace::make(n);
  FiniteMeasure pi(space, testkit::random_mass(rng, n));
  std::vector<Edge> edges;
  for (std::size_t x = 0; x + 1 < n; ++x) edges.push_back({x, x + 1, rng.uniform(0.05, 1.0)});
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t x = rng.below(n), y = rng.below(n);
    if (x != y) edges.push_back({std::min(x, y), std::max(x, y), rng.uniform(0.0, 1.0)});
  }
  return ReversibleGenerator::from_conductances(pi, edges);
}

}  // namespace

TEST_CASE("two-point form examples") {
  auto gen = two_point(1, 1);
  std::vector<double> f{0, 1};
  CHECK(dirichlet_form(gen, f, f) == doctest::Approx(0.5).epsilon(1e-15));
  auto s = gen.space_ptr();
  FiniteMeasure mu(s, {0.75, 0.25});
  const double fi_oracle = 0.5 * std::pow(std::sqrt(1.5) - std::sqrt(0.5), 2);
  CHECK(fi_oracle == doctest::Approx(0.13397).epsilon(1e-4));
  CHECK(fisher_information(mu, gen) == doctest::Approx(fi_oracle).epsilon(1e-14));
  const double ep_oracle = 0.5 * (1.5 - 0.5) * (std::log(1.5) - std::log(0.5));
  CHECK(ep_oracle == doctest::Approx(0.54931).epsilon(1e-4));
  CHECK(entropy_production(mu, gen) == doctest::Approx(ep_oracle).epsilon(1e-14));
  CHECK(fisher_information(gen.stationary(), gen) == 0.0);
  CHECK(entropy_production(gen.stationary(), gen) == 0.0);
}

TEST_CASE("support violations give infinity") {
  auto space = StateSpace::make(3);
  FiniteMeasure pi(space, {0.5, 0.5, 0.0});
  auto gen = ReversibleGenerator::from_conductances(pi, {{0, 1, 1.0}});
  FiniteMeasure mu(space, {0.5, 0.25, 0.25});
  CHECK(fisher_information(mu, gen) == std::numeric_limits<double>::infinity());
  FiniteMeasure edge(space, {1.0, 0.0, 0.0});
  CHECK(entropy_production(edge, gen) == std::numeric_limits<double>::infinity());
}

TEST_CASE("rates with inconsistent detailed balance are rejected") {
  // 3-cycle with non-reversible rates
  CHECK_THROWS_AS(ReversibleGenerator::from_rates(StateSpace::make(3),
                                                  {0, 1, 0.5, 0.5, 0, 1, 1, 0.5, 0}),
                  InvariantViolation);
}

TEST_CASE("spectral gap: 2x2 hand oracle") {
  testkit::CounterRng rng(5);
  for (int k = 0; k < 50; ++k) {
    const double a = rng.uniform(0.01, 5.0), b = rng.uniform(0.01, 5.0);
    CHECK(std::abs(spectral_gap(two_point(a, b)) - (a + b)) <= 1e-12 * (a + b));
  }
  CHECK(spectral_gap(two_point(1, 1)) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("spectral gap: complete graph") {
  const std::size_t n = 6;
  auto space = StateSpace::make(n);
  std::vector<Edge> edges;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y) edges.push_back({x, y, 1.0});
  auto gen = ReversibleGenerator::from_conductances(FiniteMeasure::uniform(space), edges);
  // Q(x,y) = 1/pi = n, eigenvalue n * n
  CHECK(spectral_gap(gen) == doctest::Approx(double(n * n)).epsilon(1e-12));
}

TEST_CASE("property: forms on random generators") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto rng = CounterRng::stream(77, seed);
    const std::size_t n = 2 + rng.below(20);
    auto gen = random_generator(rng, n);
    CHECK(gen.detailed_balance_residual() <= 1e-10);
    std::vector<double> f(n), g(n);
    for (auto& v : f) v = rng.normal();
    for (auto& v : g) v = rng.normal();
    const double efg = dirichlet_form(gen, f, g);
    CHECK(std::abs(efg - dirichlet_form(gen, g, f)) < 1e-12);
    CHECK(std::abs(efg - dirichlet_form_generator_route(gen, f, g)) < 1e-10);
    CHECK(dirichlet_form(gen, f, f) > 0.0);
    const double gap = spectral_gap(gen);
    CHECK(variance(gen.stationary(), f) <= dirichlet_form(gen, f, f) / gap * (1 + 1e-10));
    auto mu = testkit::random_measure(rng, gen.space_ptr());
    CHECK(entropy_production(mu, gen) >= 4.0 * fisher_information(mu, gen) * (1 - 1e-12));
  }
}

TEST_CASE("spectral gap against a Rayleigh-quotient oracle") {
  auto rng = CounterRng(17);
  auto gen = random_generator(rng, 12);
  // independent oracle: generalized eigenproblem on the raw Laplacian with pi weights
  const std::size_t n = 12;
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n), d = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : gen.edges()) {
    lap(e.x, e.x) += e.c;
    lap(e.y, e.y) += e.c;
    lap(e.x, e.y) -= e.c;
    lap(e.y, e.x) -= e.c;
  }
  for (std::size_t x = 0; x < n; ++x) d(x, x) = gen.stationary()[x];
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(lap, d);
  CHECK(spectral_gap(gen) == doctest::Approx(es.eigenvalues()(1)).epsilon(1e-9));
}

TEST_CASE("check_assumption examples") {
  auto rng = CounterRng(23);
  auto gen = random_generator(rng, 6);
  auto space = gen.space_ptr();
  // scaled copies of one generator: w_i c_i = c / m
  std::vector<Edge> scaled;
  for (auto e : gen.edges()) scaled.push_back({e.x, e.y, e.c});
  MixtureModel mix({gen.stationary(), gen.stationary()}, FiniteMeasure::on_indices({0.5, 0.5}));
  GeneratorMixture ok(mix, {gen, gen}, gen);
  auto rep = check_assumption(ok);
  CHECK(rep.pointwise_ok);
  CHECK(rep.min_slack >= -1e-12);

  // parent conductance below the weighted sum on one edge
  auto bumped = scaled;
  bumped[0].c *= 1.5;
  auto comp = ReversibleGenerator::from_conductances(gen.stationary(), bumped);
  GeneratorMixture bad(mix, {comp, comp}, gen);
  auto rb = check_assumption(bad);
  CHECK_FALSE(rb.pointwise_ok);
  CHECK(rb.min_slack < 0.0);
  CHECK(rb.min_eigenvalue.has_value());
}

TEST_CASE("property: pointwise domination implies form domination") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto rng = CounterRng::stream(31, seed);
    const std::size_t n = 3 + rng.below(8);
    auto g1 = random_generator(rng, n);
    auto space = g1.space_ptr();
    FiniteMeasure p2(space, testkit::random_mass(rng, n));
    std::vector<Edge> e2;
    for (std::size_t x = 0; x + 1 < n; ++x) e2.push_back({x, x + 1, rng.uniform(0.05, 1.0)});
    auto g2 = ReversibleGenerator::from_conductances(p2, e2);
    const double w = rng.uniform(0.1, 0.9);
    MixtureModel mix({g1.stationary(), p2}, FiniteMeasure::on_indices({w, 1 - w}));
    std::vector<Edge> parent;
    for (auto e : g1.edges()) parent.push_back({e.x, e.y, w * e.c + rng.uniform(0, 0.1)});
    for (auto e : e2) parent.push_back({e.x, e.y, (1 - w) * e.c});
    auto gp = ReversibleGenerator::from_conductances(mix.parent(), parent);
    GeneratorMixture gm(mix, {g1, g2}, gp);
    REQUIRE(check_assumption(gm).pointwise_ok);
    for (int k = 0; k < 50; ++k) {
      std::vector<double> f(n);
      for (auto& v : f) v = std::exp(rng.normal());
      const double lhs = w * dirichlet_form(g1, f, f) + (1 - w) * dirichlet_form(g2, f, f);
      CHECK(lhs <= dirichlet_form(gp, f, f) * (1 + 1e-12));
    }
  }
}

TEST_CASE("reweighted Poincare residual on a block mixture") {
  auto space = StateSpace::make(4);
  FiniteMeasure p1(space, {0.4, 0.6, 0, 0}), p2(space, {0, 0, 0.3, 0.7});
  auto g1 = ReversibleGenerator::from_conductances(p1, {{0, 1, 0.2}});
  auto g2 = ReversibleGenerator::from_conductances(p2, {{2, 3, 0.1}});
  MixtureModel mix({p1, p2}, FiniteMeasure::on_indices({0.5, 0.5}));
  auto gp = ReversibleGenerator::from_conductances(mix.parent(),
                                                   {{0, 1, 0.1}, {2, 3, 0.05}, {1, 2, 0.01}});
  GeneratorMixture gm(mix, {g1, g2}, gp);
  std::vector<double> g{1.0, -2.0, 0.5, 3.0};
  // block-mean removed variance oracle
  const auto& pi = mix.parent();
  double m1 = (pi[0] * g[0] + pi[1] * g[1]) / (pi[0] + pi[1]);
  double m2 = (pi[2] * g[2] + pi[3] * g[3]) / (pi[2] + pi[3]);
  double oracle = pi[0] * std::pow(g[0] - m1, 2) + pi[1] * std::pow(g[1] - m1, 2) +
                  pi[2] * std::pow(g[2] - m2, 2) + pi[3] * std::pow(g[3] - m2, 2);
  CHECK(reweighted_poincare_residual(g, gm) == doctest::Approx(oracle).epsilon(1e-12));
  std::vector<double> ind{2, 2, 0, 0};
  CHECK(std::abs(reweighted_poincare_residual(ind, gm)) < 1e-14);
}

TEST_CASE("LSI estimate dominates a grid search on the two-point chain") {
  auto gen = two_point(1, 1);
  double best = 0.0;
  for (int k = 1; k <= 999; ++k) {
    const double p = k / 1000.0;
    best = std::max(best, lsi_ratio(FiniteMeasure(gen.space_ptr(), {p, 1 - p}), gen, LsiMode::lsi));
  }
  auto est = estimate_lsi_constant(gen, LsiMode::lsi);
  CHECK(est.lower_bound >= best - 1e-6);
  CHECK(lsi_ratio(est.witness, gen, LsiMode::lsi) == doctest::Approx(est.lower_bound));

  auto rng = CounterRng(41);
  auto rg = random_generator(rng, 8);
  auto l = estimate_lsi_constant(rg, LsiMode::lsi);
  auto ml = estimate_lsi_constant(rg, LsiMode::mlsi);
  CHECK(ml.lower_bound <= l.lower_bound / 4.0 * (1 + 1e-9));
  auto serial = estimate_lsi_constant(rg, LsiMode::lsi, {.policy = Policy::serial});
  CHECK(serial.lower_bound == l.lower_bound);
}
