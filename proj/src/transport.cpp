#include "mixlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "mixlab/error.hpp"
#include "mixlab/lp.hpp"

namespace mixlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::size_t> support_of(const FiniteMeasure& mu) {
  std::vector<std::size_t> s;
  for (std::size_t x = 0; x < mu.size(); ++x)
    if (mu[x] > 0.0) s.push_back(x);
  return s;
}

void require_cost_space(const FiniteMeasure& mu, const CostMatrix& c) {
  if (mu.size() != c.size())
    throw DimensionError("cost matrix does not match the measure's space");
}

// Extend potentials known on (rows, cols) to all states by c-transforms. The
// result satisfies f(x) + g(y) <= c(x, y) everywhere when it did on the block.
void extend_potentials(const CostMatrix& c, const std::vector<std::size_t>& rows,
                       const std::vector<std::size_t>& cols, std::vector<double>& f,
                       std::vector<double>& g) {
  const std::size_t n = c.size();
  std::vector<char> is_row(n, 0), is_col(n, 0);
  for (auto x : rows) is_row[x] = 1;
  for (auto y : cols) is_col[y] = 1;
  for (std::size_t y = 0; y < n; ++y) {
    if (is_col[y]) continue;
    double best = kInf;
    for (auto x : rows) best = std::min(best, c(x, y) - f[x]);
    g[y] = best;
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (is_row[x]) continue;
    double best = kInf;
    for (std::size_t y = 0; y < n; ++y) best = std::min(best, c(x, y) - g[y]);
    f[x] = best;
  }
}

double potential_violation(const CostMatrix& c, const std::vector<double>& f,
                           const std::vector<double>& g) {
  double worst = 0.0;
  for (std::size_t x = 0; x < c.size(); ++x)
    for (std::size_t y = 0; y < c.size(); ++y)
      worst = std::max(worst, f[x] + g[y] - c(x, y));
  return worst;
}

}  // namespace

CostMatrix::CostMatrix(SpacePtr space, std::vector<double> cost)
    : space_(std::move(space)), n_(space_->size()), c_(std::move(cost)) {
  if (c_.size() != n_ * n_) throw DimensionError("cost matrix must be n x n");
  for (double v : c_)
    if (!std::isfinite(v) || v < 0.0)
      throw ConfigError("cost entries must be finite and nonnegative");
  constexpr double tol = 1e-9;
  zero_diagonal_ = true;
  for (std::size_t x = 0; x < n_; ++x)
    zero_diagonal_ &= std::abs((*this)(x, x)) <= tol;
  is_metric_ = zero_diagonal_;
  for (std::size_t x = 0; x < n_ && is_metric_; ++x)
    for (std::size_t y = 0; y < n_ && is_metric_; ++y) {
      if (std::abs((*this)(x, y) - (*this)(y, x)) > tol) is_metric_ = false;
      if (x != y && !((*this)(x, y) > tol)) is_metric_ = false;
    }
  for (std::size_t x = 0; x < n_ && is_metric_; ++x)
    for (std::size_t y = 0; y < n_ && is_metric_; ++y)
      for (std::size_t z = 0; z < n_; ++z)
        if ((*this)(x, z) > (*this)(x, y) + (*this)(y, z) + tol) {
          is_metric_ = false;
          break;
        }
}

CostMatrix CostMatrix::from_space(SpacePtr space, CostKind kind) {
  const std::size_t n = space->size();
  std::vector<double> c(n * n, 0.0);
  if (kind == CostKind::zero_one) {
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) c[x * n + y] = x == y ? 0.0 : 1.0;
    return CostMatrix(std::move(space), std::move(c));
  }
  if (!space->has_metric())
    throw ConfigError("metric-based cost requires a state-space metric");
  const auto d = space->metric_matrix();
  for (std::size_t k = 0; k < n * n; ++k)
    c[k] = kind == CostKind::metric ? d[k] : d[k] * d[k];
  return CostMatrix(std::move(space), std::move(c));
}

CostMatrix CostMatrix::from_csv(SpacePtr space, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open cost matrix file " + path);
  std::vector<double> c;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      try {
        c.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("cost matrix file " + path + ": bad entry '" + cell + "'");
      }
    }
  }
  return CostMatrix(std::move(space), std::move(c));
}

double CostMatrix::max_cost() const {
  return c_.empty() ? 0.0 : *std::max_element(c_.begin(), c_.end());
}

std::vector<double> Coupling::first_marginal() const {
  std::vector<double> out(n, 0.0);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) out[x] += gamma[x * n + y];
  return out;
}

std::vector<double> Coupling::second_marginal() const {
  std::vector<double> out(n, 0.0);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) out[y] += gamma[x * n + y];
  return out;
}

AlphaFunction AlphaFunction::power(double a, double p) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("alpha scale must be positive");
  if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("alpha exponent must be >= 1");
  return AlphaFunction(Family::power, a, p);
}

AlphaFunction AlphaFunction::w1(double C) {
  if (!(C > 0.0) || !std::isfinite(C)) throw ConfigError("W1 constant must be positive");
  return AlphaFunction(Family::w1, 2.0 * C, 2.0);
}

double AlphaFunction::operator()(double x) const {
  if (x <= 0.0) return 0.0;
  if (x == kInf) return kInf;
  return std::pow(x / a_, p_);
}

std::string AlphaFunction::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (family_ == Family::w1)
    os << "x^2/(4*C^2), C=" << a_ / 2.0;
  else
    os << "(x/" << a_ << ")^" << p_;
  return os.str();
}

OtResult ot_cost(const FiniteMeasure& mu, const FiniteMeasure& nu,
                 const CostMatrix& c) {
  require_same_space(mu, nu, "ot_cost");
  require_cost_space(mu, c);
  const std::size_t n = mu.size();
  const auto rows = support_of(mu);
  const auto cols = support_of(nu);

  lp::LinearProgram program;
  std::vector<std::size_t> var(rows.size() * cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b)
      var[a * cols.size() + b] = program.add_variable(c(rows[a], cols[b]));
  for (std::size_t a = 0; a < rows.size(); ++a) {
    std::vector<lp::Term> terms;
    for (std::size_t b = 0; b < cols.size(); ++b)
      terms.push_back({var[a * cols.size() + b], 1.0});
    program.add_constraint(std::move(terms), lp::Sense::eq, mu[rows[a]]);
  }
  for (std::size_t b = 0; b < cols.size(); ++b) {
    std::vector<lp::Term> terms;
    for (std::size_t a = 0; a < rows.size(); ++a)
      terms.push_back({var[a * cols.size() + b], 1.0});
    program.add_constraint(std::move(terms), lp::Sense::eq, nu[cols[b]]);
  }
  const auto sol = lp::solve(program);

  OtResult out;
  out.coupling.n = n;
  out.coupling.gamma.assign(n * n, 0.0);
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b)
      out.coupling.gamma[rows[a] * n + cols[b]] = sol.x[var[a * cols.size() + b]];
  out.f.assign(n, 0.0);
  out.g.assign(n, 0.0);
  for (std::size_t a = 0; a < rows.size(); ++a) out.f[rows[a]] = sol.duals[a];
  for (std::size_t b = 0; b < cols.size(); ++b)
    out.g[cols[b]] = sol.duals[rows.size() + b];
  extend_potentials(c, rows, cols, out.f, out.g);

  out.value = sol.objective;
  out.iterations = sol.iterations;
  out.duality_gap = std::abs(out.value - (mu.expectation(out.f) + nu.expectation(out.g)));
  out.potential_violation = potential_violation(c, out.f, out.g);
  out.complementary_slackness = sol.complementary_slackness;
  const double tol = 1e-9 * (1.0 + std::abs(out.value));
  if (out.duality_gap > tol || out.potential_violation > tol ||
      sol.primal_residual > tol)
    throw InvariantViolation("ot_cost: duality certificate failed",
                             std::max({out.duality_gap, out.potential_violation,
                                       sol.primal_residual}));
  return out;
}

HullTransportSolution ot_to_hull(const FiniteMeasure& mu, const MixtureModel& mix,
                                 const CostMatrix& c) {
  const auto& pi = mix.parent();
  require_same_space(mu, pi, "ot_to_hull");
  require_cost_space(mu, c);
  const std::size_t n = mu.size();
  const std::size_t m = mix.num_components();
  const auto rows = support_of(mu);
  const auto cols = support_of(pi);

  lp::LinearProgram program;
  std::vector<std::size_t> var(rows.size() * cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b)
      var[a * cols.size() + b] = program.add_variable(c(rows[a], cols[b]));
  std::vector<std::size_t> lambda_var(m);
  for (std::size_t i = 0; i < m; ++i) lambda_var[i] = program.add_variable(0.0);

  for (std::size_t a = 0; a < rows.size(); ++a) {
    std::vector<lp::Term> terms;
    for (std::size_t b = 0; b < cols.size(); ++b)
      terms.push_back({var[a * cols.size() + b], 1.0});
    program.add_constraint(std::move(terms), lp::Sense::eq, mu[rows[a]]);
  }
  for (std::size_t b = 0; b < cols.size(); ++b) {
    std::vector<lp::Term> terms;
    for (std::size_t a = 0; a < rows.size(); ++a)
      terms.push_back({var[a * cols.size() + b], 1.0});
    for (std::size_t i = 0; i < m; ++i) {
      const double p = mix.component(i)[cols[b]];
      if (p != 0.0) terms.push_back({lambda_var[i], -p});
    }
    program.add_constraint(std::move(terms), lp::Sense::eq, 0.0);
  }
  {
    std::vector<lp::Term> terms;
    for (std::size_t i = 0; i < m; ++i) terms.push_back({lambda_var[i], 1.0});
    program.add_constraint(std::move(terms), lp::Sense::eq, 1.0);
  }
  const auto sol = lp::solve(program);

  std::vector<double> lambda(m);
  for (std::size_t i = 0; i < m; ++i) lambda[i] = std::max(sol.x[lambda_var[i]], 0.0);
  HullTransportSolution out{sol.objective, FiniteMeasure::on_indices(std::move(lambda))};
  out.coupling.n = n;
  out.coupling.gamma.assign(n * n, 0.0);
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b)
      out.coupling.gamma[rows[a] * n + cols[b]] = sol.x[var[a * cols.size() + b]];
  out.f.assign(n, 0.0);
  out.g.assign(n, 0.0);
  for (std::size_t a = 0; a < rows.size(); ++a) out.f[rows[a]] = sol.duals[a];
  for (std::size_t b = 0; b < cols.size(); ++b)
    out.g[cols[b]] = sol.duals[rows.size() + b];
  extend_potentials(c, rows, cols, out.f, out.g);
  out.iterations = sol.iterations;

  double worst_component = kInf;
  for (std::size_t i = 0; i < m; ++i)
    worst_component = std::min(worst_component, mix.component(i).expectation(out.g));
  out.duality_gap = out.value - (mu.expectation(out.f) + worst_component);
  out.potential_violation = potential_violation(c, out.f, out.g);
  const double tol = 1e-6 * (1.0 + std::abs(out.value));
  if (std::abs(out.duality_gap) > tol || out.potential_violation > 1e-9 ||
      sol.primal_residual > 1e-9)
    throw InvariantViolation("ot_to_hull: duality certificate failed",
                             std::max({std::abs(out.duality_gap),
                                       out.potential_violation, sol.primal_residual}));
  return out;
}

std::vector<double> c_conjugate(std::span<const double> f, const CostMatrix& c) {
  const std::size_t n = c.size();
  if (f.size() != n) throw DimensionError("c_conjugate: function length mismatch");
  std::vector<double> out(n, kInf);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) out[y] = std::min(out[y], c(x, y) - f[x]);
  return out;
}

DualHullResult dual_to_hull(const FiniteMeasure& mu, const MixtureModel& mix,
                            const CostMatrix& c) {
  const auto& pi = mix.parent();
  require_same_space(mu, pi, "dual_to_hull");
  require_cost_space(mu, c);
  const std::size_t n = mu.size();
  const std::size_t m = mix.num_components();
  const auto rows = support_of(mu);
  const auto cols = support_of(pi);

  // max mu(f) + t  s.t.  f(x) + g(y) <= c(x, y),  t <= pi_i(g) for all i.
  lp::LinearProgram program;
  std::vector<std::size_t> f_var(rows.size()), g_var(cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a)
    f_var[a] = program.add_variable(-mu[rows[a]], true);
  for (std::size_t b = 0; b < cols.size(); ++b)
    g_var[b] = program.add_variable(0.0, true);
  const auto t_var = program.add_variable(-1.0, true);
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b)
      program.add_constraint({{f_var[a], 1.0}, {g_var[b], 1.0}}, lp::Sense::le,
                             c(rows[a], cols[b]));
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<lp::Term> terms{{t_var, 1.0}};
    for (std::size_t b = 0; b < cols.size(); ++b) {
      const double p = mix.component(i)[cols[b]];
      if (p != 0.0) terms.push_back({g_var[b], -p});
    }
    program.add_constraint(std::move(terms), lp::Sense::le, 0.0);
  }
  const auto sol = lp::solve(program);

  DualHullResult out;
  out.f.assign(n, 0.0);
  out.g.assign(n, 0.0);
  for (std::size_t a = 0; a < rows.size(); ++a) out.f[rows[a]] = sol.x[f_var[a]];
  for (std::size_t b = 0; b < cols.size(); ++b) out.g[cols[b]] = sol.x[g_var[b]];
  extend_potentials(c, rows, cols, out.f, out.g);
  out.iterations = sol.iterations;

  double worst = kInf;
  for (std::size_t i = 0; i < m; ++i) {
    const double v = mix.component(i).expectation(out.g);
    if (v < worst) {
      worst = v;
      out.active_component = i;
    }
  }
  out.value = mu.expectation(out.f) + worst;

  const auto fc = c_conjugate(out.f, c);
  double worst_conj = kInf;
  for (std::size_t i = 0; i < m; ++i)
    worst_conj = std::min(worst_conj, mix.component(i).expectation(fc));
  out.conjugate_value = mu.expectation(out.f) + worst_conj;
  if (out.conjugate_value < out.value - 1e-6)
    throw InvariantViolation("dual_to_hull: conjugate tightening lost value",
                             out.value - out.conjugate_value);
  return out;
}

TvHullResult tv_to_hull(const FiniteMeasure& mu, const MixtureModel& mix) {
  require_same_space(mu, mix.parent(), "tv_to_hull");
  const std::size_t n = mu.size();
  const std::size_t m = mix.num_components();
  // min 1/2 sum (p_x + q_x)  s.t.  sum_i l_i pi_i(x) + p_x - q_x = mu(x).
  lp::LinearProgram program;
  std::vector<std::size_t> lambda_var(m), p_var(n), q_var(n);
  for (std::size_t i = 0; i < m; ++i) lambda_var[i] = program.add_variable(0.0);
  for (std::size_t x = 0; x < n; ++x) {
    p_var[x] = program.add_variable(0.5);
    q_var[x] = program.add_variable(0.5);
  }
  for (std::size_t x = 0; x < n; ++x) {
    std::vector<lp::Term> terms{{p_var[x], 1.0}, {q_var[x], -1.0}};
    for (std::size_t i = 0; i < m; ++i) {
      const double p = mix.component(i)[x];
      if (p != 0.0) terms.push_back({lambda_var[i], p});
    }
    program.add_constraint(std::move(terms), lp::Sense::eq, mu[x]);
  }
  {
    std::vector<lp::Term> terms;
    for (std::size_t i = 0; i < m; ++i) terms.push_back({lambda_var[i], 1.0});
    program.add_constraint(std::move(terms), lp::Sense::eq, 1.0);
  }
  const auto sol = lp::solve(program);
  if (sol.duality_gap > 1e-9 * (1.0 + std::abs(sol.objective)))
    throw InvariantViolation("tv_to_hull: duality certificate failed", sol.duality_gap);
  std::vector<double> lambda(m);
  for (std::size_t i = 0; i < m; ++i) lambda[i] = std::max(sol.x[lambda_var[i]], 0.0);
  return {std::max(sol.objective, 0.0), FiniteMeasure::on_indices(std::move(lambda))};
}

double w2_1d(const FiniteMeasure& mu, const FiniteMeasure& nu) {
  require_same_space(mu, nu, "w2_1d");
  if (!mu.space().has_coords() || !nu.space().has_coords())
    throw ConfigError("w2_1d requires 1D coordinates on the state space");
  const auto coords = mu.space().coords();
  std::vector<std::size_t> order(mu.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return coords[a] < coords[b]; });

  // Monotone coupling: walk both sorted atom lists, matching mass greedily.
  std::size_t i = 0, j = 0;
  double a = mu[order[0]], b = nu[order[0]];
  double total = 0.0;
  const std::size_t n = order.size();
  while (i < n && j < n) {
    if (a <= 0.0) {
      if (++i < n) a = mu[order[i]];
      continue;
    }
    if (b <= 0.0) {
      if (++j < n) b = nu[order[j]];
      continue;
    }
    const double moved = std::min(a, b);
    const double d = coords[order[i]] - coords[order[j]];
    total += moved * d * d;
    a -= moved;
    b -= moved;
  }
  return total;
}

}  // namespace mixlab
