#include "mixlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixlab/error.hpp"
#include "mixlab/rng.hpp"
#include "mixlab/transport.hpp"

namespace mixlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_dominated(const FiniteMeasure& mu, const FiniteMeasure& pi, const char* op) {
  for (std::size_t x = 0; x < mu.size(); ++x)
    if (mu[x] > 0.0 && pi[x] == 0.0)
      throw SupportError(std::string(op) + ": initial law charges a state outside the "
                                           "stationary support",
                         x);
}

// mu -> mu L for a measure (row vector), using conductances.
void apply_forward(const ReversibleGenerator& gen, const std::vector<double>& mu,
                   std::vector<double>& out) {
  const auto& pi = gen.stationary();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t x = 0; x < mu.size(); ++x) {
    if (mu[x] == 0.0) continue;
    const double h = mu[x] / pi[x];
    const auto nb = gen.neighbours(x);
    const auto cs = gen.neighbour_conductances(x);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      out[nb[k]] += h * cs[k];
      out[x] -= h * cs[k];
    }
  }
}

}  // namespace

Propagator::Propagator(const ReversibleGenerator& gen, std::size_t dense_limit)
    : gen_(&gen), dense_(gen.support_size() <= dense_limit) {
  if (!dense_) return;
  const auto s = symmetrized_negative_generator(gen, &index_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
  if (solver.info() != Eigen::Success)
    throw NumericError("evolve: eigendecomposition failed");
  eigenvalues_ = solver.eigenvalues().cwiseMax(0.0);
  eigenvectors_ = solver.eigenvectors();
  sqrt_pi_.resize(static_cast<Eigen::Index>(index_.size()));
  for (std::size_t a = 0; a < index_.size(); ++a)
    sqrt_pi_(a) = std::sqrt(gen.stationary()[index_[a]]);
}

std::vector<double> Propagator::eigen_apply(const FiniteMeasure& mu0, double t,
                                            bool average) const {
  const auto k = static_cast<Eigen::Index>(index_.size());
  Eigen::VectorXd v(k);
  for (Eigen::Index a = 0; a < k; ++a) v(a) = mu0[index_[a]] / sqrt_pi_(a);
  Eigen::VectorXd coef = eigenvectors_.transpose() * v;
  for (Eigen::Index a = 0; a < k; ++a) {
    const double lt = eigenvalues_(a) * t;
    double factor;
    if (!average)
      factor = std::exp(-lt);
    else
      factor = lt > 1e-12 ? -std::expm1(-lt) / lt : 1.0 - 0.5 * lt;
    coef(a) *= factor;
  }
  const Eigen::VectorXd w = eigenvectors_ * coef;
  std::vector<double> out(gen_->size(), 0.0);
  for (Eigen::Index a = 0; a < k; ++a) out[index_[a]] = std::max(0.0, w(a) * sqrt_pi_(a));
  return out;
}

std::vector<double> Propagator::uniformized(const FiniteMeasure& mu0, double t) const {
  const double rate = gen_->max_exit_rate();
  std::vector<double> mu(mu0.values());
  if (rate == 0.0 || t == 0.0) return mu;
  const int pieces = std::max(1, static_cast<int>(std::ceil(rate * t / 50.0)));
  const double tau = t / pieces;
  const double a = rate * tau;
  std::vector<double> term(mu.size()), next(mu.size()), acc(mu.size()), lmu(mu.size());
  for (int p = 0; p < pieces; ++p) {
    term = mu;
    double weight = std::exp(-a);
    double cumulative = weight;
    for (std::size_t x = 0; x < mu.size(); ++x) acc[x] = weight * term[x];
    for (int j = 1; 1.0 - cumulative > 1e-13 && j < 100000; ++j) {
      apply_forward(*gen_, term, lmu);
      for (std::size_t x = 0; x < mu.size(); ++x) term[x] += lmu[x] / rate;
      weight *= a / j;
      cumulative += weight;
      for (std::size_t x = 0; x < mu.size(); ++x) acc[x] += weight * term[x];
    }
    for (std::size_t x = 0; x < mu.size(); ++x) mu[x] = std::max(0.0, acc[x]);
  }
  return mu;
}

FiniteMeasure Propagator::at(const FiniteMeasure& mu0, double t, double* drift) const {
  require_dominated(mu0, gen_->stationary(), "evolve");
  auto v = dense_ ? eigen_apply(mu0, t, false) : uniformized(mu0, t);
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  if (!(total > 0.0)) throw NumericError("evolve: propagated mass vanished");
  if (drift) *drift = std::abs(total - 1.0);
  return FiniteMeasure(mu0.space_ptr(), std::move(v));
}

std::vector<double> Propagator::time_averaged_law(const FiniteMeasure& mu0,
                                                  double t) const {
  require_dominated(mu0, gen_->stationary(), "time_averaged_law");
  if (t <= 0.0) return mu0.values();
  if (dense_) return eigen_apply(mu0, t, true);
  // Trapezoid over a fine grid of uniformized laws.
  const int steps = 400;
  std::vector<double> acc(mu0.size(), 0.0);
  for (int k = 0; k <= steps; ++k) {
    const auto m = at(mu0, t * k / steps);
    const double w = (k == 0 || k == steps) ? 0.5 : 1.0;
    for (std::size_t x = 0; x < acc.size(); ++x) acc[x] += w * m[x] / steps;
  }
  return acc;
}

std::vector<double> uniform_times(double horizon, std::size_t steps) {
  std::vector<double> t(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) t[k] = horizon * k / steps;
  return t;
}

EvolutionTrace evolve(const ReversibleGenerator& gen, const FiniteMeasure& mu0,
                      std::span<const double> times, const GeneratorMixture* mixture) {
  require_same_space(mu0, gen.stationary(), "evolve");
  if (times.empty() || times[0] != 0.0)
    throw ConfigError("evolve: time grid must start at 0");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1]))
      throw ConfigError("evolve: time grid must be strictly increasing");
  if (mixture) require_same_space(mu0, mixture->parent.stationary(), "evolve");

  const Propagator prop(gen);
  const auto& pi = gen.stationary();
  EvolutionTrace tr;
  tr.has_mixture = mixture != nullptr;
  double running_max = -kInf;
  for (double t : times) {
    double drift = 0.0;
    auto mu = t == 0.0 ? mu0 : prop.at(mu0, t, &drift);
    tr.max_renormalization = std::max(tr.max_renormalization, drift);
    tr.times.push_back(t);
    tr.kl_t.push_back(kl_divergence(mu, pi));
    tr.fi_t.push_back(fisher_information(mu, gen));
    tr.ep_t.push_back(entropy_production(mu, gen));
    if (mixture) {
      auto lam = responsibilities(mu, mixture->mix);
      const double klw = kl_divergence(lam, mixture->mix.weights());
      running_max = std::max(running_max, klw);
      tr.kl_hull_t.push_back(kl_to_hull(mu, mixture->mix).value);
      tr.kl_weights_t.push_back(klw);
      tr.delta_t.push_back(running_max - klw);
      tr.lambda_t.push_back(std::move(lam));
    }
    tr.states.push_back(std::move(mu));
  }
  return tr;
}

void write_trace_csv(const std::string& path, const io::Stamp& stamp,
                     const EvolutionTrace& trace) {
  std::vector<std::string> cols{"t", "kl", "kl_hull", "kl_weights", "delta", "fi", "ep"};
  const std::size_t m = trace.has_mixture ? trace.lambda_t.front().size() : 0;
  for (std::size_t i = 0; i < m; ++i) cols.push_back("lambda_" + std::to_string(i + 1));
  io::CsvWriter csv(path, stamp, cols);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    std::vector<double> row{trace.times[k],
                            trace.kl_t[k],
                            trace.has_mixture ? trace.kl_hull_t[k] : nan,
                            trace.has_mixture ? trace.kl_weights_t[k] : nan,
                            trace.has_mixture ? trace.delta_t[k] : nan,
                            trace.fi_t[k],
                            trace.ep_t[k]};
    for (std::size_t i = 0; i < m; ++i) row.push_back(trace.lambda_t[k][i]);
    csv.row(row);
  }
}

std::vector<double> dissipation_residuals(const EvolutionTrace& trace) {
  std::vector<double> r;
  for (std::size_t k = 1; k + 1 < trace.times.size(); ++k)
    r.push_back((trace.kl_t[k + 1] - trace.kl_t[k - 1]) /
                    (trace.times[k + 1] - trace.times[k - 1]) +
                trace.ep_t[k]);
  return r;
}

std::vector<double> integrated_fisher(const ReversibleGenerator& gen, const FiniteMeasure& mu0,
                                      std::span<const double> times, double tolerance) {
  const Propagator prop(gen);
  auto fi = [&](double s) { return fisher_information(s == 0.0 ? mu0 : prop.at(mu0, s), gen); };
  // Adaptive Simpson with Richardson correction.
  auto simpson = [&](auto&& self, double a, double b, double fa, double fm, double fb,
                     double whole, double tol, int depth) -> double {
    const double m = 0.5 * (a + b);
    const double lm = fi(0.5 * (a + m)), rm = fi(0.5 * (m + b));
    const double left = (m - a) / 6.0 * (fa + 4.0 * lm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * rm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    return self(self, a, m, fa, lm, fm, left, 0.5 * tol, depth - 1) +
           self(self, m, b, fm, rm, fb, right, 0.5 * tol, depth - 1);
  };
  std::vector<double> out(times.size(), 0.0);
  double prev = fi(times.empty() ? 0.0 : times[0]);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double a = times[k - 1], b = times[k];
    const double fb = fi(b), fm = fi(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (prev + 4.0 * fm + fb);
    out[k] = out[k - 1] + simpson(simpson, a, b, prev, fm, fb, whole, tolerance, 40);
    prev = fb;
  }
  return out;
}

std::vector<InequalityReport> dissipation_check(const EvolutionTrace& trace,
                                                const ReversibleGenerator& gen) {
  const auto& t = trace.times;
  if (t.size() < 3) throw PreconditionError("dissipation_check needs at least 3 times");
  const double dt = t[1] - t[0];
  for (std::size_t k = 1; k < t.size(); ++k)
    if (std::abs((t[k] - t[k - 1]) - dt) > 1e-9 * dt)
      throw PreconditionError("dissipation_check needs a uniform time grid");
  if (gen.irreducible() && gen.support_size() > 1) {
    const double gap = spectral_gap(gen);
    if (dt > 0.1 / gap * (1.0 + 1e-12))
      throw PreconditionError("dissipation_check: step " + std::to_string(dt) +
                              " exceeds 0.1/gap = " + std::to_string(0.1 / gap));
  }
  Digest digest;
  digest.add(std::span<const double>(t)).add(std::span<const double>(trace.kl_t));
  const std::string dg = digest.hex();

  std::vector<InequalityReport> out;
  const bool finite = std::isfinite(trace.kl_t[0]);
  if (finite) {
    // Starts off the support of some edge have infinite ep at t = 0; grid
    // points whose stencil touches an infinite ep are left out.
    const auto res = dissipation_residuals(trace);
    double worst = 0.0, curvature = 0.0;
    std::size_t skipped = 0;
    for (std::size_t k = 1; k + 1 < t.size(); ++k) {
      const auto& ep = trace.ep_t;
      if (!std::isfinite(ep[k - 1]) || !std::isfinite(ep[k]) || !std::isfinite(ep[k + 1])) {
        ++skipped;
        continue;
      }
      worst = std::max(worst, std::abs(res[k - 1]));
      curvature = std::max(curvature, std::abs(ep[k + 1] - 2.0 * ep[k] + ep[k - 1]) / (dt * dt));
    }
    const double tol = dt * dt / 6.0 * 2.0 * curvature + 1e-9;
    auto r = make_report("dissipation.centered_difference", worst, tol, dg,
                         ReportKind::parameter_free);
    r.note = "max over interior grid points of |dKL/dt + ep|";
    if (skipped) r.note += "; points next to an infinite ep skipped: " + std::to_string(skipped);
    out.push_back(std::move(r));
  } else {
    out.push_back(make_report("dissipation.centered_difference", kInf, kInf, dg,
                              ReportKind::parameter_free));
  }

  const auto integral = integrated_fisher(gen, trace.states.front(), t);
  InequalityReport worst;
  bool have = false;
  double worst_rel = kInf;
  for (std::size_t k = 1; k < t.size(); ++k) {
    auto r = make_report("dissipation.average_fisher", integral[k] / t[k],
                         trace.kl_t[0] / (4.0 * t[k]), dg, ReportKind::parameter_free);
    const double rel = std::isfinite(r.rhs) ? r.margin / (1.0 + std::abs(r.rhs)) : kInf;
    if (!have || rel < worst_rel) {
      worst = r;
      worst_rel = rel;
      worst.note = "worst grid time t = " + io::format_double(t[k]);
      have = true;
    }
  }
  out.push_back(worst);
  return out;
}

std::vector<InequalityReport> metastability_report(const EvolutionTrace& trace,
                                                   const GeneratorMixture& gm,
                                                   double C_prime,
                                                   Provenance provenance) {
  if (!trace.has_mixture)
    throw PreconditionError("metastability_report needs mixture diagnostics in the trace");
  if (!(C_prime > 0.0)) throw ConfigError("metastability_report: C' must be positive");
  const auto a = check_assumption(gm);
  if (!a.pointwise_ok && !a.entropy_form_ok)
    throw PreconditionError("metastability_report: entropy-form domination not verified");

  Digest digest;
  digest.add(std::span<const double>(trace.times))
      .add(std::span<const double>(trace.kl_t))
      .add(C_prime);
  const std::string dg = digest.hex();
  const std::vector<ConstantUsed> used{{"C_prime", C_prime, provenance}};
  const double kl0 = trace.kl_t[0];

  auto worst_of = [&](const char* name, auto lhs_at, auto slack_at) {
    InequalityReport worst;
    double worst_rel = kInf;
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
      const double decay = kl0 == 0.0 ? 0.0 : std::exp(-trace.times[k] / C_prime) * kl0;
      auto r = make_report(name, lhs_at(k), decay + slack_at(k), dg, ReportKind::constant,
                           used);
      const double rel = std::isfinite(r.rhs) ? r.margin / (1.0 + std::abs(r.rhs)) : kInf;
      if (k == 0 || rel < worst_rel) {
        worst_rel = rel;
        worst = r;
        worst.note = "worst grid time t = " + io::format_double(trace.times[k]) + " of " +
                     std::to_string(trace.times.size());
      }
    }
    return worst;
  };

  std::vector<double> eta(trace.times.size());
  double run = -kInf;
  for (std::size_t k = 0; k < eta.size(); ++k) eta[k] = run = std::max(run, trace.kl_weights_t[k]);

  return {worst_of("metastability.hull", [&](std::size_t k) { return trace.kl_hull_t[k]; },
                   [&](std::size_t k) { return trace.delta_t[k]; }),
          worst_of("metastability.eta", [&](std::size_t k) { return trace.kl_t[k]; },
                   [&](std::size_t k) { return eta[k]; })};
}

double TrajectoryBatch::mean() const {
  std::vector<double> v(time_averages);
  std::sort(v.begin(), v.end());
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double TrajectoryBatch::standard_error() const {
  if (time_averages.size() < 2) return 0.0;
  const double m = mean();
  std::vector<double> sq;
  sq.reserve(time_averages.size());
  for (double v : time_averages) sq.push_back((v - m) * (v - m));
  std::sort(sq.begin(), sq.end());
  const double var =
      std::accumulate(sq.begin(), sq.end(), 0.0) / static_cast<double>(sq.size() - 1);
  return std::sqrt(var / static_cast<double>(sq.size()));
}

namespace {

struct JumpTable {
  std::vector<double> exit;
  std::vector<std::size_t> offset;
  std::vector<std::size_t> target;
  std::vector<double> cumulative;  // cumulative rates per state
};

JumpTable jump_table(const ReversibleGenerator& gen) {
  JumpTable jt;
  const auto& pi = gen.stationary();
  jt.offset.push_back(0);
  for (std::size_t x = 0; x < gen.size(); ++x) {
    double acc = 0.0;
    if (pi[x] > 0.0) {
      const auto nb = gen.neighbours(x);
      const auto cs = gen.neighbour_conductances(x);
      for (std::size_t k = 0; k < nb.size(); ++k) {
        if (cs[k] <= 0.0) continue;
        acc += cs[k] / pi[x];
        jt.target.push_back(nb[k]);
        jt.cumulative.push_back(acc);
      }
    }
    jt.exit.push_back(acc);
    jt.offset.push_back(jt.target.size());
  }
  return jt;
}

double one_trajectory(const JumpTable& jt, const std::vector<double>& init_cdf,
                      std::span<const double> f, double horizon, CounterRng rng) {
  const double u = rng.uniform();
  std::size_t x = std::upper_bound(init_cdf.begin(), init_cdf.end(), u) - init_cdf.begin();
  x = std::min(x, init_cdf.size() - 1);
  double t = 0.0, integral = 0.0;
  while (true) {
    const double q = jt.exit[x];
    const double hold = q > 0.0 ? rng.exponential() / q : kInf;
    if (t + hold >= horizon) {
      integral += f[x] * (horizon - t);
      break;
    }
    integral += f[x] * hold;
    t += hold;
    const double target = rng.uniform() * q;
    const auto first = jt.cumulative.begin() + jt.offset[x];
    const auto last = jt.cumulative.begin() + jt.offset[x + 1];
    auto it = std::upper_bound(first, last, target);
    if (it == last) --it;
    x = jt.target[it - jt.cumulative.begin()];
  }
  return integral / horizon;
}

}  // namespace

TrajectoryBatch simulate_time_average(const ReversibleGenerator& gen,
                                      const FiniteMeasure& mu0, std::span<const double> f,
                                      double horizon, std::size_t count,
                                      std::uint64_t seed, Policy policy) {
  require_same_space(mu0, gen.stationary(), "simulate_time_average");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw ConfigError("simulate_time_average: horizon must be positive");
  if (count < 1) throw ConfigError("simulate_time_average: count must be at least 1");
  if (f.size() != gen.size()) throw DimensionError("simulate_time_average: f length");

  const auto jt = jump_table(gen);
  std::vector<double> cdf(mu0.size());
  std::partial_sum(mu0.values().begin(), mu0.values().end(), cdf.begin());
  std::size_t last = cdf.size() - 1;
  while (last > 0 && mu0[last] == 0.0) --last;
  std::fill(cdf.begin() + static_cast<std::ptrdiff_t>(last), cdf.end(), 1.0);

  TrajectoryBatch batch;
  batch.seed = seed;
  batch.count = count;
  batch.horizon = horizon;
  batch.time_averages.assign(count, 0.0);
  const auto n = static_cast<std::int64_t>(count);
  if (policy == Policy::parallel) {
    ExceptionTrap trap;
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < n; ++k)
      trap.guard(k, [&] {
        batch.time_averages[k] = one_trajectory(jt, cdf, f, horizon, CounterRng::stream(seed, k));
      });
    trap.rethrow();
  } else {
    for (std::int64_t k = 0; k < n; ++k)
      batch.time_averages[k] = one_trajectory(jt, cdf, f, horizon, CounterRng::stream(seed, k));
  }
  return batch;
}

double expected_time_average(const Propagator& prop, const FiniteMeasure& mu0,
                             std::span<const double> f, double horizon) {
  const auto law = prop.time_averaged_law(mu0, horizon);
  double s = 0.0;
  for (std::size_t x = 0; x < law.size(); ++x) s += law[x] * f[x];
  return s;
}

bool ConcentrationReport::pass() const {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

io::Json ConcentrationReport::to_json() const {
  io::Json rows_json = io::Json::array();
  for (const auto& r : rows)
    rows_json.push_back({{"r", r.r},
                         {"level", r.level},
                         {"empirical", r.empirical},
                         {"bound", r.bound},
                         {"slack", r.slack},
                         {"pass", r.pass}});
  return {{"lipschitz", lipschitz},
          {"l2_density", l2_density},
          {"max_component_mean", max_component_mean},
          {"conjugate_level", conjugate_level},
          {"C", C},
          {"C_provenance", to_string(C_provenance)},
          {"horizon", horizon},
          {"count", count},
          {"seed", seed},
          {"pass", pass()},
          {"thresholds", rows_json}};
}

double probe_w1_constant(const GeneratorMixture& gm, int probes, std::uint64_t seed,
                         Policy policy) {
  const auto& space = gm.parent.space();
  if (!space.has_metric()) throw ConfigError("W1 probe needs a metric on the state space");
  const auto cost = CostMatrix::from_space(gm.parent.space_ptr(), CostKind::metric);
  const auto& pi = gm.parent.stationary();
  const std::size_t m = gm.mix.num_components();
  std::vector<double> ratio(probes, 0.0);
  auto one = [&](int k) {
    auto rng = CounterRng::stream(seed, k);
    std::vector<double> v(pi.size(), 0.0);
    if (k % 2 == 0) {
      for (std::size_t x = 0; x < v.size(); ++x)
        if (pi[x] > 0.0) v[x] = std::pow(rng.exponential(), 1.0 / 0.7);
    } else {
      const auto lam = random_simplex(rng, m);
      const double spread = rng.uniform(0.05, 1.0);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t x = 0; x < v.size(); ++x) v[x] += lam[i] * gm.mix.component(i)[x];
      for (std::size_t x = 0; x < v.size(); ++x)
        if (v[x] > 0.0) v[x] *= std::exp(spread * rng.normal());
    }
    const FiniteMeasure nu(gm.parent.space_ptr(), std::move(v));
    const double w1 = ot_to_hull(nu, gm.mix, cost).value;
    const double fi = fisher_information(nu, gm.parent);
    if (w1 <= 0.0) return 0.0;
    return fi > 0.0 ? w1 / (2.0 * std::sqrt(fi)) : kInf;
  };
  if (policy == Policy::parallel) {
    ExceptionTrap trap;
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < probes; ++k) trap.guard(k, [&] { ratio[k] = one(k); });
    trap.rethrow();
  } else {
    for (int k = 0; k < probes; ++k) ratio[k] = one(k);
  }
  return *std::max_element(ratio.begin(), ratio.end());
}

ConcentrationReport concentration_experiment(const GeneratorMixture& gm,
                                             const FiniteMeasure& mu0,
                                             std::span<const double> f, double horizon,
                                             std::size_t count, std::uint64_t seed, double C,
                                             Provenance C_provenance,
                                             std::vector<double> thresholds,
                                             Policy policy) {
  const auto& space = gm.parent.space();
  if (!space.has_metric())
    throw ConfigError("concentration_experiment needs a metric on the state space");
  if (!(C > 0.0)) throw ConfigError("concentration_experiment: C must be positive");
  const auto& pi = gm.parent.stationary();
  const std::size_t n = pi.size();
  require_dominated(mu0, pi, "concentration_experiment");

  ConcentrationReport rep;
  rep.C = C;
  rep.C_provenance = C_provenance;
  rep.horizon = horizon;
  rep.count = count;
  rep.seed = seed;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y)
      rep.lipschitz = std::max(rep.lipschitz, std::abs(f[x] - f[y]) / space.metric(x, y));
  for (std::size_t x = 0; x < n; ++x)
    if (pi[x] > 0.0) rep.l2_density += mu0[x] * mu0[x] / pi[x];
  rep.l2_density = std::sqrt(rep.l2_density);

  rep.max_component_mean = -kInf;
  for (std::size_t i = 0; i < gm.mix.num_components(); ++i)
    rep.max_component_mean = std::max(rep.max_component_mean, gm.mix.component(i).expectation(f));
  if (rep.lipschitz > 0.0) {
    const auto cost = CostMatrix::from_space(gm.parent.space_ptr(), CostKind::metric);
    std::vector<double> unit(f.begin(), f.end());
    for (auto& v : unit) v /= rep.lipschitz;
    const auto fc = c_conjugate(unit, cost);
    double worst = kInf;
    for (std::size_t i = 0; i < gm.mix.num_components(); ++i)
      worst = std::min(worst, gm.mix.component(i).expectation(fc));
    rep.conjugate_level = -worst * rep.lipschitz;
  } else {
    rep.conjugate_level = rep.max_component_mean;
  }

  if (thresholds.empty())
    for (int k = 1; k <= 10; ++k) thresholds.push_back(0.1 * k);
  const auto batch = simulate_time_average(gm.parent, mu0, f, horizon, count, seed, policy);
  for (double r : thresholds) {
    ThresholdRow row;
    row.r = r;
    row.level = rep.max_component_mean + r;
    std::size_t hits = 0;
    for (double v : batch.time_averages) hits += v >= row.level;
    row.empirical = static_cast<double>(hits) / static_cast<double>(count);
    row.bound = rep.lipschitz > 0.0
                    ? rep.l2_density *
                          std::exp(-horizon * r * r / (4.0 * C * C * rep.lipschitz * rep.lipschitz))
                    : 0.0;
    const double p = std::min(row.bound, 1.0);
    row.slack = 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(count)) +
                1.0 / static_cast<double>(count);
    row.pass = row.empirical <= row.bound + row.slack;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace mixlab
