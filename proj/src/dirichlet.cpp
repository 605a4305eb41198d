#include "mixlab/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <unordered_map>

#include "mixlab/error.hpp"
#include "mixlab/rng.hpp"

namespace mixlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Edge> canonical_edges(std::vector<Edge> edges, std::size_t n) {
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (auto e : edges) {
    if (e.x >= n || e.y >= n) throw DimensionError("edge endpoint out of range");
    if (!std::isfinite(e.c) || e.c < 0.0)
      throw ConfigError("edge conductance must be finite and nonnegative");
    if (e.x == e.y || e.c == 0.0) continue;
    if (e.x > e.y) std::swap(e.x, e.y);
    out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  std::vector<Edge> merged;
  for (const auto& e : out) {
    if (!merged.empty() && merged.back().x == e.x && merged.back().y == e.y)
      merged.back().c += e.c;
    else
      merged.push_back(e);
  }
  return merged;
}

std::uint64_t edge_key(std::size_t x, std::size_t y, std::size_t n) {
  if (x > y) std::swap(x, y);
  return static_cast<std::uint64_t>(x) * n + y;
}

}  // namespace

ReversibleGenerator::ReversibleGenerator(FiniteMeasure stationary,
                                         std::vector<Edge> edges)
    : stationary_(std::move(stationary)) {
  const std::size_t n = stationary_.size();
  edges_ = canonical_edges(std::move(edges), n);
  for (const auto& e : edges_)
    if (stationary_[e.x] == 0.0 || stationary_[e.y] == 0.0)
      throw ConfigError("edge (" + std::to_string(e.x) + ", " +
                        std::to_string(e.y) +
                        ") touches a state outside the stationary support");

  std::vector<std::size_t> degree(n, 0);
  for (const auto& e : edges_) {
    ++degree[e.x];
    ++degree[e.y];
  }
  adj_offset_.assign(n + 1, 0);
  for (std::size_t x = 0; x < n; ++x) adj_offset_[x + 1] = adj_offset_[x] + degree[x];
  adj_target_.resize(adj_offset_[n]);
  adj_c_.resize(adj_offset_[n]);
  std::vector<std::size_t> fill(adj_offset_.begin(), adj_offset_.end() - 1);
  for (const auto& e : edges_) {
    adj_target_[fill[e.x]] = e.y;
    adj_c_[fill[e.x]++] = e.c;
    adj_target_[fill[e.y]] = e.x;
    adj_c_[fill[e.y]++] = e.c;
  }

  exit_rate_.assign(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    if (stationary_[x] == 0.0) continue;
    double s = 0.0;
    for (double c : neighbour_conductances(x)) s += c;
    exit_rate_[x] = s / stationary_[x];
  }

  std::size_t start = n;
  support_size_ = 0;
  for (std::size_t x = 0; x < n; ++x) {
    if (stationary_[x] > 0.0) {
      ++support_size_;
      if (start == n) start = x;
    }
  }
  std::vector<char> seen(n, 0);
  std::queue<std::size_t> queue;
  queue.push(start);
  seen[start] = 1;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const auto x = queue.front();
    queue.pop();
    for (auto y : neighbours(x))
      if (!seen[y]) {
        seen[y] = 1;
        ++reached;
        queue.push(y);
      }
  }
  irreducible_ = reached == support_size_;
}

ReversibleGenerator ReversibleGenerator::from_conductances(
    FiniteMeasure stationary, std::vector<Edge> edges) {
  return ReversibleGenerator(std::move(stationary), std::move(edges));
}

ReversibleGenerator ReversibleGenerator::from_rates(
    SpacePtr space, const std::vector<double>& rates,
    std::optional<FiniteMeasure> stationary) {
  const std::size_t n = space->size();
  if (rates.size() != n * n) throw DimensionError("rate matrix must be n x n");
  auto q = [&](std::size_t x, std::size_t y) { return rates[x * n + y]; };
  for (std::size_t x = 0; x < n; ++x) {
    double row = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      if (x == y) continue;
      if (!std::isfinite(q(x, y)) || q(x, y) < 0.0)
        throw ConfigError("off-diagonal rates must be finite and nonnegative");
      row += q(x, y);
    }
    if (q(x, x) != 0.0 && std::abs(q(x, x) + row) > 1e-10 * std::max(1.0, row))
      throw ConfigError("rate matrix row " + std::to_string(x) +
                        " does not sum to zero");
  }

  if (!stationary) {
    // Reversible chains satisfy pi(y)/pi(x) = Q(x,y)/Q(y,x) along any path.
    std::vector<double> log_pi(n, 0.0);
    std::vector<char> seen(n, 0);
    std::queue<std::size_t> queue;
    queue.push(0);
    seen[0] = 1;
    while (!queue.empty()) {
      const auto x = queue.front();
      queue.pop();
      for (std::size_t y = 0; y < n; ++y) {
        if (y == x || seen[y] || q(x, y) == 0.0) continue;
        if (q(y, x) == 0.0)
          throw InvariantViolation(
              "rate matrix is not reversible: one-way transition", 1.0);
        log_pi[y] = log_pi[x] + std::log(q(x, y)) - std::log(q(y, x));
        seen[y] = 1;
        queue.push(y);
      }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
      throw IrreducibilityError(
          "cannot infer the stationary measure of a reducible rate matrix");
    const double top = *std::max_element(log_pi.begin(), log_pi.end());
    std::vector<double> pi(n);
    for (std::size_t x = 0; x < n; ++x) pi[x] = std::exp(log_pi[x] - top);
    stationary.emplace(space, std::move(pi));
  }
  const auto& pi = *stationary;
  if (pi.size() != n) throw DimensionError("stationary measure has wrong size");

  std::vector<Edge> edges;
  double worst = 0.0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y) {
      const double fwd = pi[x] * q(x, y);
      const double bwd = pi[y] * q(y, x);
      const double scale = std::max(fwd, bwd);
      if (scale == 0.0) continue;
      worst = std::max(worst, std::abs(fwd - bwd) / scale);
      edges.push_back({x, y, 0.5 * (fwd + bwd)});
    }
  if (worst > 1e-10)
    throw InvariantViolation("rates violate detailed balance", worst);
  return ReversibleGenerator(pi, std::move(edges));
}

double ReversibleGenerator::conductance(std::size_t x, std::size_t y) const {
  const auto nb = neighbours(x);
  const auto cs = neighbour_conductances(x);
  for (std::size_t k = 0; k < nb.size(); ++k)
    if (nb[k] == y) return cs[k];
  return 0.0;
}

double ReversibleGenerator::rate(std::size_t x, std::size_t y) const {
  if (x == y) return -exit_rate_[x];
  if (stationary_[x] == 0.0) return 0.0;
  return conductance(x, y) / stationary_[x];
}

double ReversibleGenerator::max_exit_rate() const {
  return exit_rate_.empty() ? 0.0
                            : *std::max_element(exit_rate_.begin(), exit_rate_.end());
}

std::vector<double> ReversibleGenerator::apply(std::span<const double> f) const {
  const std::size_t n = size();
  if (f.size() != n) throw DimensionError("function length does not match generator");
  std::vector<double> out(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    if (stationary_[x] == 0.0) continue;
    const auto nb = neighbours(x);
    const auto cs = neighbour_conductances(x);
    double s = 0.0;
    for (std::size_t k = 0; k < nb.size(); ++k) s += cs[k] * (f[nb[k]] - f[x]);
    out[x] = s / stationary_[x];
  }
  return out;
}

std::vector<double> ReversibleGenerator::dense_rates() const {
  const std::size_t n = size();
  std::vector<double> q(n * n, 0.0);
  for (const auto& e : edges_) {
    q[e.x * n + e.y] = e.c / stationary_[e.x];
    q[e.y * n + e.x] = e.c / stationary_[e.y];
  }
  for (std::size_t x = 0; x < n; ++x) q[x * n + x] = -exit_rate_[x];
  return q;
}

double ReversibleGenerator::detailed_balance_residual() const {
  double worst = 0.0;
  for (const auto& e : edges_) {
    const double fwd = stationary_[e.x] * (e.c / stationary_[e.x]);
    const double bwd = stationary_[e.y] * (e.c / stationary_[e.y]);
    worst = std::max(worst, std::abs(fwd - bwd) / std::max(fwd, bwd));
  }
  return worst;
}

GeneratorMixture::GeneratorMixture(MixtureModel mix_,
                                   std::vector<ReversibleGenerator> components_,
                                   ReversibleGenerator parent_)
    : mix(std::move(mix_)),
      components(std::move(components_)),
      parent(std::move(parent_)) {
  if (components.size() != mix.num_components())
    throw DimensionError("one generator per mixture component is required");
  auto check = [](const FiniteMeasure& a, const FiniteMeasure& b,
                  const std::string& what) {
    require_same_space(a, b, "generator mixture");
    double worst = 0.0;
    for (std::size_t x = 0; x < a.size(); ++x)
      worst = std::max(worst, std::abs(a[x] - b[x]));
    if (worst > 1e-12)
      throw InvariantViolation(what + " stationary measure does not match", worst);
  };
  for (std::size_t i = 0; i < components.size(); ++i)
    check(components[i].stationary(), mix.component(i),
          "component " + std::to_string(i));
  check(parent.stationary(), mix.parent(), "parent");
}

double dirichlet_form_generator_route(const ReversibleGenerator& gen,
                                      std::span<const double> f,
                                      std::span<const double> g) {
  if (f.size() != gen.size()) throw DimensionError("dirichlet_form: bad length");
  const auto lg = gen.apply(g);
  double s = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x)
    s -= gen.stationary()[x] * f[x] * lg[x];
  return s;
}

double dirichlet_form(const ReversibleGenerator& gen, std::span<const double> f,
                      std::span<const double> g) {
  if (f.size() != gen.size() || g.size() != gen.size())
    throw DimensionError("dirichlet_form: function length does not match");
  double s = 0.0, scale = 0.0;
  for (const auto& e : gen.edges()) {
    const double t = e.c * (f[e.x] - f[e.y]) * (g[e.x] - g[e.y]);
    s += t;
    scale += std::abs(t);
  }
  const double other = dirichlet_form_generator_route(gen, f, g);
  const double diff = std::abs(other - s);
  if (diff > 1e-10 * (1.0 + scale))
    throw InvariantViolation("dirichlet_form: edge and generator forms disagree",
                             diff);
  return s;
}

double fisher_information(const FiniteMeasure& mu, const ReversibleGenerator& gen) {
  const auto& pi = gen.stationary();
  require_same_space(mu, pi, "fisher_information");
  std::vector<double> root(mu.size(), 0.0);
  for (std::size_t x = 0; x < mu.size(); ++x) {
    if (pi[x] > 0.0)
      root[x] = std::sqrt(mu[x] / pi[x]);
    else if (mu[x] > 0.0)
      return kInf;
  }
  double s = 0.0;
  for (const auto& e : gen.edges()) {
    const double d = root[e.x] - root[e.y];
    s += e.c * d * d;
  }
  return s;
}

double entropy_production(const FiniteMeasure& mu, const ReversibleGenerator& gen) {
  const auto& pi = gen.stationary();
  require_same_space(mu, pi, "entropy_production");
  std::vector<double> f(mu.size(), 0.0);
  for (std::size_t x = 0; x < mu.size(); ++x) {
    if (pi[x] > 0.0)
      f[x] = mu[x] / pi[x];
    else if (mu[x] > 0.0)
      return kInf;
  }
  double s = 0.0;
  for (const auto& e : gen.edges()) {
    const double a = f[e.x], b = f[e.y];
    if (a == b) continue;
    if (a == 0.0 || b == 0.0) return kInf;
    s += e.c * (a - b) * (std::log(a) - std::log(b));
  }
  return s;
}

namespace {

double entropy_form(const ReversibleGenerator& gen, std::span<const double> f) {
  double s = 0.0;
  for (const auto& e : gen.edges()) {
    const double a = f[e.x], b = f[e.y];
    if (a != b) s += e.c * (a - b) * (std::log(a) - std::log(b));
  }
  return s;
}

}  // namespace

AssumptionReport check_assumption(const GeneratorMixture& gm,
                                  const AssumptionOptions& options) {
  const auto& parent = gm.parent;
  const std::size_t n = parent.size();
  for (const auto& comp : gm.components)
    if (comp.size() != n)
      throw DimensionError("check_assumption: component space differs from parent");

  std::unordered_map<std::uint64_t, double> weighted;
  for (std::size_t i = 0; i < gm.components.size(); ++i) {
    const double w = gm.mix.weights()[i];
    for (const auto& e : gm.components[i].edges())
      weighted[edge_key(e.x, e.y, n)] += w * e.c;
  }

  AssumptionReport report;
  report.min_slack = kInf;
  auto consider = [&](std::size_t x, std::size_t y, double slack) {
    if (slack < report.min_slack) {
      report.min_slack = slack;
      report.worst_x = x;
      report.worst_y = y;
    }
  };
  std::unordered_map<std::uint64_t, char> parent_edges;
  for (const auto& e : parent.edges()) {
    const auto key = edge_key(e.x, e.y, n);
    parent_edges[key] = 1;
    const auto it = weighted.find(key);
    consider(e.x, e.y, e.c - (it == weighted.end() ? 0.0 : it->second));
  }
  for (const auto& [key, value] : weighted)
    if (!parent_edges.count(key)) consider(key / n, key % n, -value);
  report.pointwise_ok = report.min_slack >= -1e-12;

  if (report.pointwise_ok) {
    report.psd_ok = true;
    report.entropy_form_ok = true;
    return report;
  }

  // Quadratic-form fallback in the pi-weighted inner product.
  std::vector<std::size_t> index;
  for (std::size_t x = 0; x < n; ++x)
    if (parent.in_support(x)) index.push_back(x);
  std::vector<std::ptrdiff_t> pos(n, -1);
  for (std::size_t a = 0; a < index.size(); ++a) pos[index[a]] = a;
  const auto k = static_cast<Eigen::Index>(index.size());
  Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(k, k);
  auto add_laplacian = [&](const ReversibleGenerator& gen, double weight) {
    for (const auto& e : gen.edges()) {
      const auto a = pos[e.x], b = pos[e.y];
      const double c = weight * e.c;
      diff(a, a) += c;
      diff(b, b) += c;
      diff(a, b) -= c;
      diff(b, a) -= c;
    }
  };
  add_laplacian(parent, 1.0);
  for (std::size_t i = 0; i < gm.components.size(); ++i)
    add_laplacian(gm.components[i], -gm.mix.weights()[i]);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b)
      diff(a, b) /= std::sqrt(parent.stationary()[index[a]] *
                              parent.stationary()[index[b]]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(diff,
                                                        Eigen::EigenvaluesOnly);
  report.min_eigenvalue = solver.eigenvalues()(0);
  report.psd_ok = *report.min_eigenvalue >= -1e-10;

  CounterRng rng(options.seed);
  std::vector<double> f(n);
  report.entropy_form_ok = true;
  report.entropy_form_worst_margin = kInf;
  for (int s = 0; s < options.samples; ++s) {
    const double spread = rng.uniform(0.1, 3.0);
    for (auto& v : f) v = std::exp(spread * rng.normal());
    const double lhs_parent = entropy_form(parent, f);
    double rhs_components = 0.0;
    for (std::size_t i = 0; i < gm.components.size(); ++i)
      rhs_components += gm.mix.weights()[i] * entropy_form(gm.components[i], f);
    const double margin = lhs_parent - rhs_components;
    report.entropy_form_worst_margin =
        std::min(report.entropy_form_worst_margin, margin);
    if (margin < -1e-12 * (1.0 + std::abs(lhs_parent)))
      report.entropy_form_ok = false;
  }
  report.entropy_form_samples = options.samples;
  return report;
}

Eigen::MatrixXd symmetrized_negative_generator(
    const ReversibleGenerator& gen, std::vector<std::size_t>* support_index) {
  const std::size_t n = gen.size();
  std::vector<std::size_t> index;
  for (std::size_t x = 0; x < n; ++x)
    if (gen.in_support(x)) index.push_back(x);
  std::vector<std::ptrdiff_t> pos(n, -1);
  for (std::size_t a = 0; a < index.size(); ++a) pos[index[a]] = a;
  const auto k = static_cast<Eigen::Index>(index.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  const auto& pi = gen.stationary();
  for (Eigen::Index a = 0; a < k; ++a) m(a, a) = gen.exit_rate(index[a]);
  for (const auto& e : gen.edges()) {
    const double v = -e.c / std::sqrt(pi[e.x] * pi[e.y]);
    m(pos[e.x], pos[e.y]) = v;
    m(pos[e.y], pos[e.x]) = v;
  }
  if (support_index) *support_index = std::move(index);
  return m;
}

SpectralGap spectral_gap_with_eigenfunction(const ReversibleGenerator& gen) {
  if (!gen.irreducible())
    throw IrreducibilityError("spectral_gap requires an irreducible generator");
  std::vector<std::size_t> index;
  const auto m = symmetrized_negative_generator(gen, &index);
  SpectralGap out;
  out.eigenfunction.assign(gen.size(), 0.0);
  if (index.size() < 2) {
    out.gap = kInf;
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success)
    throw NumericError("spectral_gap: eigensolver failed");
  out.gap = solver.eigenvalues()(1);
  const auto& pi = gen.stationary();
  for (std::size_t a = 0; a < index.size(); ++a)
    out.eigenfunction[index[a]] =
        solver.eigenvectors()(static_cast<Eigen::Index>(a), 1) /
        std::sqrt(pi[index[a]]);
  return out;
}

double spectral_gap(const ReversibleGenerator& gen) {
  return spectral_gap_with_eigenfunction(gen).gap;
}

double variance(const FiniteMeasure& pi, std::span<const double> g) {
  const double mean = pi.expectation(g);
  double s = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x)
    if (pi[x] > 0.0) s += pi[x] * (g[x] - mean) * (g[x] - mean);
  return s;
}

double reweighted_poincare_residual(std::span<const double> g,
                                    const GeneratorMixture& gm) {
  const auto& pi = gm.mix.parent();
  if (g.size() != pi.size())
    throw DimensionError("reweighted_poincare_residual: bad function length");
  std::vector<std::size_t> index;
  for (std::size_t x = 0; x < pi.size(); ++x)
    if (pi[x] > 0.0) index.push_back(x);
  const auto k = static_cast<Eigen::Index>(index.size());
  const auto m = static_cast<Eigen::Index>(gm.mix.num_components());
  Eigen::MatrixXd design(k, m);
  Eigen::VectorXd target(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    const auto x = index[a];
    const double root = std::sqrt(pi[x]);
    target(a) = root * g[x];
    for (Eigen::Index i = 0; i < m; ++i)
      design(a, i) = root * gm.mix.component(i)[x] / pi[x];
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  const Eigen::VectorXd coef = cod.solve(target);
  return (target - design * coef).squaredNorm();
}

// ---------------------------------------------------------------------------
// LSI constant search.

namespace {

struct LocalEdge {
  std::size_t a, b;
  double c;
};

class RatioObjective {
 public:
  RatioObjective(const ReversibleGenerator& gen, LsiMode mode) : mode_(mode) {
    std::vector<std::ptrdiff_t> pos(gen.size(), -1);
    for (std::size_t x = 0; x < gen.size(); ++x)
      if (gen.in_support(x)) {
        pos[x] = static_cast<std::ptrdiff_t>(states_.size());
        states_.push_back(x);
        pi_.push_back(gen.stationary()[x]);
      }
    for (const auto& e : gen.edges())
      edges_.push_back({static_cast<std::size_t>(pos[e.x]),
                        static_cast<std::size_t>(pos[e.y]), e.c});
  }

  std::size_t size() const { return pi_.size(); }
  const std::vector<double>& pi() const { return pi_; }
  const std::vector<std::size_t>& states() const { return states_; }

  double value(const std::vector<double>& mu, std::vector<double>* grad) const {
    const std::size_t k = pi_.size();
    std::vector<double> f(k);
    double kl = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      f[a] = mu[a] / pi_[a];
      if (mu[a] > 0.0)
        kl += mu[a] * std::log1p((mu[a] - pi_[a]) / pi_[a]) - (mu[a] - pi_[a]);
      else
        kl += pi_[a];
    }
    double denom = 0.0;
    for (const auto& e : edges_) {
      const double fa = f[e.a], fb = f[e.b];
      if (mode_ == LsiMode::lsi) {
        const double d = std::sqrt(fa) - std::sqrt(fb);
        denom += e.c * d * d;
      } else if (fa != fb) {
        if (fa == 0.0 || fb == 0.0) return 0.0;
        denom += e.c * (fa - fb) * (std::log(fa) - std::log(fb));
      }
    }
    if (!(denom > 0.0) || !std::isfinite(denom)) {
      if (grad) grad->assign(k, 0.0);
      return 0.0;
    }
    const double ratio = std::max(kl, 0.0) / denom;
    if (grad) {
      std::vector<double> dd(k, 0.0);
      for (const auto& e : edges_) {
        const double fa = f[e.a], fb = f[e.b];
        if (mode_ == LsiMode::lsi) {
          const double ra = std::sqrt(fa), rb = std::sqrt(fb);
          if (ra > 0.0) dd[e.a] += e.c * (ra - rb) / (ra * pi_[e.a]);
          if (rb > 0.0) dd[e.b] += e.c * (rb - ra) / (rb * pi_[e.b]);
        } else {
          const double l = std::log(fa) - std::log(fb);
          dd[e.a] += e.c * (l + (fa - fb) / fa) / pi_[e.a];
          dd[e.b] += e.c * (-l + (fb - fa) / fb) / pi_[e.b];
        }
      }
      grad->resize(k);
      for (std::size_t a = 0; a < k; ++a) {
        const double dkl = mu[a] > 0.0 ? std::log(f[a]) : 0.0;
        (*grad)[a] = (dkl * denom - kl * dd[a]) / (denom * denom);
      }
    }
    return ratio;
  }

 private:
  LsiMode mode_;
  std::vector<std::size_t> states_;
  std::vector<double> pi_;
  std::vector<LocalEdge> edges_;
};

double mirror_ascent(const RatioObjective& obj, std::vector<double>& mu,
                     long max_iterations) {
  const std::size_t k = mu.size();
  std::vector<double> grad, trial(k), trial_grad;
  double value = obj.value(mu, &grad);
  double step = 0.5;
  int stalls = 0;
  for (long it = 0; it < max_iterations && step > 1e-12; ++it) {
    double mean = 0.0;
    for (std::size_t a = 0; a < k; ++a) mean += mu[a] * grad[a];
    double spread = 0.0;
    for (std::size_t a = 0; a < k; ++a)
      spread = std::max(spread, std::abs(grad[a] - mean));
    if (!(spread > 0.0) || !std::isfinite(spread)) break;
    const double eta = step / spread;
    double total = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      trial[a] = mu[a] * std::exp(eta * (grad[a] - mean));
      total += trial[a];
    }
    for (auto& v : trial) v /= total;
    const double candidate = obj.value(trial, &trial_grad);
    if (candidate > value) {
      const double gain = candidate - value;
      mu.swap(trial);
      grad.swap(trial_grad);
      value = candidate;
      step = std::min(step * 1.5, 4.0);
      stalls = gain <= 1e-14 * value ? stalls + 1 : 0;
      if (stalls >= 25) break;
    } else {
      step *= 0.5;
    }
  }
  return value;
}

}  // namespace

double lsi_ratio(const FiniteMeasure& mu, const ReversibleGenerator& gen,
                 LsiMode mode) {
  const double kl = kl_divergence(mu, gen.stationary());
  const double denom = mode == LsiMode::lsi ? fisher_information(mu, gen)
                                            : entropy_production(mu, gen);
  if (!std::isfinite(kl) || !(denom > 0.0) || !std::isfinite(denom)) return 0.0;
  return kl / denom;
}

LsiEstimate estimate_lsi_constant(const ReversibleGenerator& gen, LsiMode mode,
                                  const LsiEstimateOptions& options) {
  if (!gen.irreducible())
    throw IrreducibilityError("estimate_lsi_constant requires an irreducible generator");
  const RatioObjective obj(gen, mode);
  const std::size_t k = obj.size();
  const auto& pi = obj.pi();
  if (k < 2)
    return {0.0, gen.stationary(), mode, 0};

  std::vector<std::vector<double>> starts;
  for (int s = 0; s < options.random_starts; ++s) {
    auto rng = CounterRng::stream(options.seed, static_cast<std::uint64_t>(s));
    static constexpr double kShapes[] = {1.0, 0.5, 0.25, 2.0};
    starts.push_back(random_simplex(rng, k, kShapes[s % 4]));
  }
  const int concentrated =
      std::min<int>(options.concentrated_starts, static_cast<int>(k));
  for (int j = 0; j < concentrated; ++j) {
    const std::size_t a = static_cast<std::size_t>(j) * k / concentrated;
    std::vector<double> mu(k);
    for (std::size_t b = 0; b < k; ++b) mu[b] = 0.1 * pi[b];
    mu[a] += 0.9;
    starts.push_back(std::move(mu));
  }
  // Perturbations of pi along the slowest eigenfunction; the ratio tends to
  // its linearized value there, which random starts rarely approach.
  {
    const auto sg = spectral_gap_with_eigenfunction(gen);
    double peak = 0.0;
    for (auto x : obj.states()) peak = std::max(peak, std::abs(sg.eigenfunction[x]));
    if (peak > 0.0) {
      for (double amp : {0.5, 0.1, 1e-2, 1e-3})
        for (double sign : {1.0, -1.0}) {
          std::vector<double> mu(k);
          for (std::size_t a = 0; a < k; ++a)
            mu[a] = pi[a] * (1.0 + sign * amp / peak * sg.eigenfunction[obj.states()[a]]);
          starts.push_back(std::move(mu));
        }
    }
  }

  const auto count = static_cast<std::ptrdiff_t>(starts.size());
  std::vector<double> values(starts.size(), 0.0);
  auto run = [&](std::ptrdiff_t s) {
    values[s] = mirror_ascent(obj, starts[s], options.max_iterations);
  };
  if (options.policy == Policy::parallel) {
    ExceptionTrap trap;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t s = 0; s < count; ++s) trap.guard(s, [&] { run(s); });
    trap.rethrow();
  } else {
    for (std::ptrdiff_t s = 0; s < count; ++s) run(s);
  }

  std::size_t best = 0;
  for (std::size_t s = 1; s < values.size(); ++s)
    if (values[s] > values[best]) best = s;

  std::vector<double> full(gen.size(), 0.0);
  for (std::size_t a = 0; a < k; ++a) full[obj.states()[a]] = starts[best][a];
  FiniteMeasure witness(gen.space_ptr(), std::move(full));
  // Report the ratio re-evaluated through the public definitions.
  const double certified = lsi_ratio(witness, gen, mode);
  return {certified, std::move(witness), mode, static_cast<int>(starts.size())};
}

}  // namespace mixlab
