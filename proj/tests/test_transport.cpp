#include <cmath>

#include "doctest.h"
#include "mixlab/error.hpp"
#include "mixlab/lp.hpp"
#include "mixlab/transport.hpp"
#include "support.hpp"

using namespace mixlab;

namespace {

SpacePtr grid(std::size_t n, double h = 1.0) {
  std::vector<double> c(n);
  for (std::size_t x = 0; x < n; ++x) c[x] = h * x;
  return StateSpace::line(c);
}

// W1 on the line: sum of |CDF difference| times cell width.
double cdf_w1(const FiniteMeasure& a, const FiniteMeasure& b) {
  const auto c = a.space().coords();
  double fa = 0, fb = 0, s = 0;
  for (std::size_t x = 0; x + 1 < a.size(); ++x) {
    fa += a[x];
    fb += b[x];
    s += std::abs(fa - fb) * (c[x + 1] - c[x]);
  }
  return s;
}

}  // namespace

TEST_CASE("lp: small textbook problem") {
  // min -x - y  s.t. x + 2y <= 4, 3x + y <= 6
  lp::LinearProgram p;
  auto x = p.add_variable(-1), y = p.add_variable(-1);
  p.add_constraint({{x, 1}, {y, 2}}, lp::Sense::le, 4);
  p.add_constraint({{x, 3}, {y, 1}}, lp::Sense::le, 6);
  auto s = lp::solve(p);
  CHECK(s.objective == doctest::Approx(-2.8));
  CHECK(s.x[x] == doctest::Approx(1.6));
  CHECK(s.duality_gap < 1e-12);
  CHECK(s.duals[0] <= 0.0);

  lp::LinearProgram infeasible;
  auto z = infeasible.add_variable(1);
  infeasible.add_constraint({{z, 1}}, lp::Sense::ge, 2);
  infeasible.add_constraint({{z, 1}}, lp::Sense::le, 1);
  CHECK_THROWS_AS(lp::solve(infeasible), SolverError);

  lp::LinearProgram unbounded;
  auto u = unbounded.add_variable(-1);
  unbounded.add_constraint({{u, 1}}, lp::Sense::ge, 0);
  CHECK_THROWS_AS(lp::solve(unbounded), SolverError);
}

TEST_CASE("cost matrix flags") {
  auto s = grid(4);
  CHECK(CostMatrix::from_space(s, CostKind::metric).is_metric());
  CHECK_FALSE(CostMatrix::from_space(s, CostKind::squared_metric).is_metric());
  CHECK(CostMatrix::from_space(s, CostKind::squared_metric).zero_diagonal());
  CHECK(CostMatrix::from_space(StateSpace::make(3), CostKind::zero_one).is_metric());
  CHECK_THROWS_AS(CostMatrix::from_space(StateSpace::make(3), CostKind::metric), ConfigError);
  CHECK_THROWS_AS(CostMatrix(s, std::vector<double>(16, -1.0)), ConfigError);
}

TEST_CASE("ot_cost examples") {
  auto s = grid(2);
  auto c = CostMatrix::from_space(s, CostKind::metric);
  FiniteMeasure mu(s, {0.7, 0.3}), nu(s, {0.4, 0.6});
  // one-parameter coupling family gamma(0,0) = t
  double best = INFINITY;
  for (int k = 0; k <= 4000; ++k) {
    const double t = 0.1 + 0.3 * k / 4000.0;  // feasible range [0.1, 0.4]
    best = std::min(best, (0.7 - t) + (0.4 - t));
  }
  auto r = ot_cost(mu, nu, c);
  CHECK(r.value == doctest::Approx(best).epsilon(1e-12));
  CHECK(r.value == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(ot_cost(mu, mu, c).value == doctest::Approx(0.0));

  testkit::CounterRng rng(8);
  auto g = grid(30, 0.1);
  auto cg = CostMatrix::from_space(g, CostKind::metric);
  for (int k = 0; k < 10; ++k) {
    auto a = testkit::random_measure(rng, g, 0.2), b = testkit::random_measure(rng, g, 0.2);
    auto res = ot_cost(a, b, cg);
    CHECK(res.value == doctest::Approx(cdf_w1(a, b)).epsilon(1e-9));
    CHECK(res.duality_gap <= 1e-9 * (1 + res.value));
    CHECK(res.potential_violation <= 1e-9);
    auto m1 = res.coupling.first_marginal(), m2 = res.coupling.second_marginal();
    for (std::size_t x = 0; x < 30; ++x) {
      CHECK(std::abs(m1[x] - a[x]) < 1e-9);
      CHECK(std::abs(m2[x] - b[x]) < 1e-9);
    }
  }
}

TEST_CASE("c_conjugate examples") {
  auto s = grid(3);
  auto c2 = CostMatrix::from_space(s, CostKind::squared_metric);
  std::vector<double> f{1, 0, 0};
  auto fc = c_conjugate(f, c2);
  // exhaustive minimization oracle
  for (std::size_t y = 0; y < 3; ++y) {
    double best = INFINITY;
    for (std::size_t x = 0; x < 3; ++x) best = std::min(best, c2(x, y) - f[x]);
    CHECK(fc[y] == best);
  }
  CHECK(fc[0] == -1.0);
  CHECK(fc[1] == 0.0);
  CHECK(fc[2] == 0.0);

  auto g = grid(10, 0.3);
  auto c1 = CostMatrix::from_space(g, CostKind::metric);
  testkit::CounterRng rng(2);
  for (int k = 0; k < 20; ++k) {
    // 1-Lipschitz on the line: integrate slopes in [-1, 1]
    std::vector<double> h(10, 0.0);
    for (std::size_t x = 1; x < 10; ++x) h[x] = h[x - 1] + 0.3 * rng.uniform(-1, 1);
    auto hc = c_conjugate(h, c1);
    auto hcc = c_conjugate(hc, c1);
    for (std::size_t x = 0; x < 10; ++x) {
      CHECK(hc[x] == doctest::Approx(-h[x]).epsilon(1e-12));
      CHECK(hcc[x] == doctest::Approx(h[x]).epsilon(1e-12));
    }
  }
}

TEST_CASE("hull transport on the 4-state block mixture") {
  auto s = StateSpace::make(4);
  auto c = CostMatrix::from_space(s, CostKind::zero_one);
  MixtureModel mix({FiniteMeasure(s, {0.5, 0.5, 0, 0}), FiniteMeasure(s, {0, 0, 0.5, 0.5})},
                   FiniteMeasure::on_indices({0.5, 0.5}));
  FiniteMeasure mu(s, {0.4, 0.1, 0.25, 0.25});
  double best = INFINITY;
  for (int k = 0; k <= 1000; ++k) {
    const double t = k / 1000.0;
    best = std::min(best, ot_cost(mu, mix.reweighted(FiniteMeasure::on_indices({t, 1 - t})), c).value);
  }
  auto h = ot_to_hull(mu, mix, c);
  CHECK(h.value == doctest::Approx(best).epsilon(1e-9));
  CHECK(h.value == doctest::Approx(0.15).epsilon(1e-9));
  auto d = dual_to_hull(mu, mix, c);
  CHECK(std::abs(d.value - best) <= 1e-6 * (1 + best));
  CHECK(tv_to_hull(mu, mix).value == doctest::Approx(h.value).epsilon(1e-9));

  auto h2 = ot_to_hull(mix.component(1), mix, c);
  CHECK(h2.value == doctest::Approx(0.0));
  CHECK(h2.lambda_hat[1] == doctest::Approx(1.0));
}

TEST_CASE("property: hull transport and duality") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto rng = testkit::CounterRng::stream(55, seed);
    const std::size_t n = 3 + rng.below(8), m = 1 + rng.below(3);
    auto g = grid(n, 0.5);
    auto c = CostMatrix::from_space(g, seed % 2 ? CostKind::metric : CostKind::squared_metric);
    auto mix = testkit::random_mixture(rng, g, m);
    auto mu = testkit::random_measure(rng, g, 0.2);
    auto h = ot_to_hull(mu, mix, c);
    CHECK(std::abs(h.duality_gap) <= 1e-6 * (1 + h.value));
    CHECK(h.potential_violation <= 1e-9);
    double min_comp = INFINITY;
    for (std::size_t i = 0; i < m; ++i) min_comp = std::min(min_comp, ot_cost(mu, mix.component(i), c).value);
    CHECK(h.value <= min_comp + 1e-9);
    if (m == 1) CHECK(h.value == doctest::Approx(min_comp).epsilon(1e-9));
    auto d = dual_to_hull(mu, mix, c);
    CHECK(std::abs(d.value - h.value) <= 1e-6 * (1 + h.value));
    CHECK(d.conjugate_value >= d.value - 1e-6);
    CHECK(d.value <= ot_cost(mu, mix.parent(), c).value + 1e-9);

    auto inside = mix.reweighted(FiniteMeasure::on_indices(mixlab::random_simplex(rng, m)));
    CHECK(ot_to_hull(inside, mix, c).value < 1e-9);

    // joint convexity of T_c
    auto a1 = testkit::random_measure(rng, g), a2 = testkit::random_measure(rng, g);
    auto b1 = testkit::random_measure(rng, g), b2 = testkit::random_measure(rng, g);
    for (double t : {0.25, 0.5, 0.75}) {
      std::vector<double> a(n), b(n);
      for (std::size_t x = 0; x < n; ++x) {
        a[x] = t * a1[x] + (1 - t) * a2[x];
        b[x] = t * b1[x] + (1 - t) * b2[x];
      }
      const double lhs = ot_cost(FiniteMeasure(g, a), FiniteMeasure(g, b), c).value;
      const double rhs = t * ot_cost(a1, b1, c).value + (1 - t) * ot_cost(a2, b2, c).value;
      CHECK(lhs <= rhs + 1e-9);
    }
  }
}

TEST_CASE("w2_1d matches the LP") {
  auto g = grid(50, 0.1);
  auto c = CostMatrix::from_space(g, CostKind::squared_metric);
  testkit::CounterRng rng(4);
  auto a = testkit::random_measure(rng, g, 0.3), b = testkit::random_measure(rng, g, 0.3);
  CHECK(std::abs(w2_1d(a, b) - ot_cost(a, b, c).value) < 1e-8);
  CHECK(w2_1d(a, a) == doctest::Approx(0.0));
  auto pts = StateSpace::line({0.0, 2.5});
  CHECK(w2_1d(FiniteMeasure::point_mass(pts, 0), FiniteMeasure::point_mass(pts, 1)) ==
        doctest::Approx(6.25));
  CHECK_THROWS_AS(w2_1d(FiniteMeasure::uniform(StateSpace::make(2)),
                        FiniteMeasure::uniform(StateSpace::make(2))),
                  ConfigError);
}

TEST_CASE("alpha family") {
  auto a = AlphaFunction::w1(2.0);
  CHECK(a(4.0) == doctest::Approx(16.0 / 16.0));
  CHECK(a(0.0) == 0.0);
  CHECK_THROWS_AS(AlphaFunction::power(1.0, 0.5), ConfigError);
}
