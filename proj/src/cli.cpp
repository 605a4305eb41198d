#include "mixlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "mixlab/continuum1d.hpp"
#include "mixlab/dynamics.hpp"
#include "mixlab/error.hpp"
#include "mixlab/inequalities.hpp"
#include "mixlab/json_io.hpp"
#include "mixlab/model_zoo.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/rng.hpp"
#include "mixlab/schema.hpp"
#include "mixlab/svg.hpp"

namespace mixlab::cli {

namespace fs = std::filesystem;
using io::Json;
using io::ObjectReader;

namespace {

class NumericFailure : public std::runtime_error {
 public:
  NumericFailure(std::string op, const std::string& what)
      : std::runtime_error(what), op_(std::move(op)) {}
  const std::string& op() const { return op_; }

 private:
  std::string op_;
};

// Library errors other than configuration problems become numeric failures
// tagged with the operation that raised them.
template <class F>
auto guarded(const char* op, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const NumericFailure&) {
    throw;
  } catch (const Error& e) {
    throw NumericFailure(op, e.what());
  }
}

struct Context {
  std::string experiment;
  fs::path config_dir;
  fs::path out_dir;
  io::Stamp stamp;
  bool plots = false;
  std::ostream* log = nullptr;
  std::ostream* err = nullptr;
  std::vector<std::string> written;
  std::vector<InequalityReport> reports;

  std::string file(const std::string& name) {
    written.push_back(name);
    return (out_dir / name).string();
  }
  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : config_dir / path;
  }
  void warn(const std::string& msg) const { *err << "warning: " << msg << '\n'; }
};

Json read_json_file(const fs::path& path, const std::string& where) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(where + ": cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(where + ": " + path.string() + " is not valid JSON (" + e.what() + ")");
  }
}

// {"config_digest", "seed", "experiment", "result"} on one line.
void write_result(Context& ctx, const std::string& name, Json result) {
  std::ofstream out(ctx.file(name), std::ios::binary);
  if (!out) throw ConfigError("cannot write " + (ctx.out_dir / name).string());
  out << io::dump(Json{{"config_digest", ctx.stamp.config_digest},
                       {"seed", ctx.stamp.seed},
                       {"experiment", ctx.experiment},
                       {"result", std::move(result)}})
      << '\n';
}

Provenance read_provenance(ObjectReader& r, const std::string& key, Provenance fallback) {
  if (!r.has(key)) return fallback;
  const auto s = r.text(key);
  if (s == "user_supplied") return Provenance::user_supplied;
  if (s == "estimated") return Provenance::estimated;
  if (s == "exact") return Provenance::exact;
  throw ConfigError(r.path(key) + ": expected user_supplied, estimated or exact");
}

std::optional<double> optional_positive(ObjectReader& r, const std::string& key) {
  if (!r.has(key)) return std::nullopt;
  return r.positive(key);
}

Grid1D read_grid(ObjectReader& r, const std::string& key, Grid1D fallback) {
  if (!r.has(key)) return fallback;
  auto g = r.object(key);
  Grid1D grid{g.real("lo"), g.real("hi"), static_cast<std::size_t>(g.count("n"))};
  g.finish();
  try {
    grid.validate();
  } catch (const Error& e) {
    throw ConfigError(r.path(key) + ": " + e.what());
  }
  return grid;
}

BuiltModel load_model(ObjectReader& r, Context& ctx) {
  if (!r.has("model")) throw ConfigError(r.path("model") + ": required field missing");
  const Json& spec = r.raw("model");
  if (spec.is_string()) {
    const auto path = ctx.resolve(spec.get<std::string>());
    const Json j = read_json_file(path, r.path("model"));
    if (j.is_object() && j.contains("kind"))
      return guarded("build_model", [&] { return build_model(j, ctx.stamp.seed, path.string()); });
    return guarded("mixture_from_json", [&] {
      return BuiltModel{"file", io::mixture_from_json(j), {}, {}};
    });
  }
  if (!spec.is_object())
    throw ConfigError(r.path("model") + ": expected a model object or a file path");
  return guarded("build_model", [&] { return build_model(spec, ctx.stamp.seed, r.path("model")); });
}

FiniteMeasure random_on_support(const FiniteMeasure& pi, double holes, double shape,
                                std::uint64_t seed) {
  auto rng = CounterRng::stream(seed, 0x6d6561737572ULL);
  auto p = random_simplex(rng, pi.size(), shape);
  const std::size_t keep = rng.below(pi.size());
  for (std::size_t x = 0; x < p.size(); ++x) {
    if (x != keep && rng.uniform() < holes) p[x] = 0.0;
    if (pi[x] <= 0.0) p[x] = 0.0;
  }
  double total = 0.0;
  for (double v : p) total += v;
  if (!(total > 0.0)) return pi;
  return FiniteMeasure(pi.space_ptr(), p);
}

// Measure inputs: stationary | mass | component | reweighted | point | random.
FiniteMeasure read_measure(ObjectReader& parent, const std::string& key,
                           const GeneratorMixture& gm, std::uint64_t seed,
                           const std::string& fallback) {
  const auto& pi = gm.parent.stationary();
  const std::size_t n = pi.size(), m = gm.mix.num_components();
  if (!parent.has(key)) {
    if (fallback == "component") return gm.mix.component(0);
    return random_on_support(pi, 0.0, 0.7, seed);
  }
  auto r = parent.object(key);
  const auto type = r.text("type");
  FiniteMeasure out = pi;
  if (type == "stationary") {
  } else if (type == "mass") {
    const auto v = r.probability("mass");
    if (v.size() != n)
      throw ConfigError(r.path("mass") + ": expected " + std::to_string(n) + " entries");
    out = FiniteMeasure(pi.space_ptr(), v);
  } else if (type == "component") {
    const auto i = r.count("index", 0);
    if (i >= m) throw ConfigError(r.path("index") + ": no such component");
    out = gm.mix.component(i);
  } else if (type == "reweighted") {
    const auto lambda = r.probability("lambda");
    if (lambda.size() != m)
      throw ConfigError(r.path("lambda") + ": expected " + std::to_string(m) + " entries");
    out = gm.mix.reweighted(FiniteMeasure::on_indices(lambda));
  } else if (type == "point") {
    const auto x = r.count("state");
    if (x >= n) throw ConfigError(r.path("state") + ": no such state");
    out = FiniteMeasure::point_mass(pi.space_ptr(), x);
  } else if (type == "random") {
    const double holes = r.nonnegative("holes", 0.0);
    if (holes >= 1.0) throw ConfigError(r.path("holes") + ": must be below 1");
    const double shape = r.positive("shape", 0.7);
    out = random_on_support(pi, holes, shape, r.count("seed", seed));
  } else {
    throw ConfigError(r.path("type") +
                      ": expected stationary, mass, component, reweighted, point or random");
  }
  r.finish();
  return out;
}

CostMatrix read_cost(ObjectReader& r, const std::string& key, const GeneratorMixture& gm,
                     const Context& ctx) {
  const auto& space = gm.parent.space_ptr();
  auto from_kind = [&](const std::string& kind) {
    CostKind k;
    if (kind == "metric") k = CostKind::metric;
    else if (kind == "squared_metric") k = CostKind::squared_metric;
    else if (kind == "zero_one") k = CostKind::zero_one;
    else throw ConfigError(r.path(key) + ": expected metric, squared_metric, zero_one or {\"csv\": path}");
    if (k != CostKind::zero_one && !space->has_metric())
      throw ConfigError(r.path(key) + ": the model's state space has no metric");
    return CostMatrix::from_space(space, k);
  };
  if (!r.has(key)) return from_kind(space->has_metric() ? "metric" : "zero_one");
  const Json& j = r.raw(key);
  if (j.is_string()) return from_kind(j.get<std::string>());
  if (!j.is_object()) throw ConfigError(r.path(key) + ": expected a string or an object");
  auto c = r.object(key);
  const auto path = ctx.resolve(c.text("csv"));
  c.finish();
  try {
    return CostMatrix::from_csv(space, path.string());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(r.path(key) + ": " + e.what());
  }
}

// Largest estimated (M)LSI lower bound over the components.
double estimate_component_constant(const GeneratorMixture& gm, LsiMode mode, std::uint64_t seed) {
  double best = 0.0;
  for (const auto& g : gm.components) {
    if (g.support_size() < 2) continue;
    LsiEstimateOptions opt;
    opt.seed = seed;
    best = std::max(best, estimate_lsi_constant(g, mode, opt).lower_bound);
  }
  return best;
}

std::string summary_line(const InequalityReport& r) {
  const char* tag = r.pass ? "PASS" : (r.status() == "violation" ? "FAIL" : "WARN");
  char buf[160];
  std::snprintf(buf, sizeof buf, "lhs=%.6g rhs=%.6g margin=%.3g", r.lhs, r.rhs, r.margin);
  std::string line = std::string(tag) + " " + r.name + " " + buf + " [" + to_string(r.kind);
  for (const auto& c : r.constants_used) line += ", " + c.name + " " + to_string(c.provenance);
  line += "]";
  if (!r.pass) line += " " + r.status();
  return line;
}

int exit_status(const Context& ctx) {
  bool theorem = false, constant = false;
  for (const auto& r : ctx.reports) {
    *ctx.log << summary_line(r) << '\n';
    if (r.pass) continue;
    if (r.kind == ReportKind::parameter_free) theorem = true;
    else if (r.kind == ReportKind::constant && !r.estimated()) constant = true;
    else ctx.warn(r.name + ": " + r.status());
  }
  if (theorem) return kExitTheoremViolation;
  if (constant) return kExitConstantFailure;
  return kExitOk;
}

void archive_reports(Context& ctx) {
  const auto jl = ctx.file("reports.jsonl");
  const auto csv = ctx.file("reports.csv");
  io::write_reports(jl, csv, ctx.stamp, ctx.reports);
}

void archive_model(Context& ctx, const BuiltModel& model) {
  Json j = io::to_json(model.gm);
  j["kind"] = model.kind;
  j["warnings"] = model.warnings;
  io::write_json_lines(ctx.file("model.jsonl"), ctx.stamp, {j});
  for (const auto& w : model.warnings) ctx.warn(w);
}

void append(std::vector<InequalityReport>& to, std::vector<InequalityReport> from) {
  for (auto& r : from) to.push_back(std::move(r));
}

// ---------------------------------------------------------------------------

void run_verify(ObjectReader& cfg, Context& ctx) {
  const auto model = load_model(cfg, ctx);
  const auto& gm = model.gm;
  const auto mu = read_measure(cfg, "measure", gm, ctx.stamp.seed, "random");
  const auto cost = read_cost(cfg, "cost", gm, ctx);
  TiProbeOptions probe;
  probe.probes = static_cast<int>(cfg.count("probes", 200));
  probe.seed = ctx.stamp.seed;

  std::optional<AlphaFunction> alpha;
  Provenance alpha_prov = Provenance::user_supplied;
  if (cfg.has("alpha")) {
    auto a = cfg.object("alpha");
    if (a.has("w1_C")) {
      alpha = AlphaFunction::w1(a.positive("w1_C"));
    } else {
      const double p = a.real("p", 2.0);
      if (!(p >= 1.0)) throw ConfigError(a.path("p") + ": must be at least 1");
      alpha = AlphaFunction::power(a.positive("a"), p);
    }
    alpha_prov = read_provenance(a, "provenance", Provenance::user_supplied);
    a.finish();
  }

  LsiConstants lsi;
  CorollaryConstants cor;
  bool estimate = true;
  if (cfg.has("constants")) {
    auto c = cfg.object("constants");
    lsi.C = optional_positive(c, "C");
    lsi.C_prime = optional_positive(c, "C_prime");
    lsi.provenance = read_provenance(c, "provenance", Provenance::user_supplied);
    estimate = c.flag("estimate", true);
    cor.C_talagrand = optional_positive(c, "C_talagrand");
    cor.talagrand_provenance = lsi.provenance;
    cor.C_poincare = optional_positive(c, "C_poincare");
    cor.poincare_provenance = lsi.provenance;
    c.finish();
  }
  cfg.finish();
  cor.seed = ctx.stamp.seed;

  archive_model(ctx, model);
  const auto digest = inputs_digest(mu, gm);

  const auto assumption = guarded("check_assumption", [&] { return check_assumption(gm); });
  {
    const double deficit = assumption.pointwise_ok || !assumption.min_eigenvalue
                               ? -assumption.min_slack
                               : -*assumption.min_eigenvalue;
    // Avoid printing -0.
    const double shown = deficit == 0.0 ? 0.0 : deficit;
    auto r = make_report("assumption.domination", shown, 0.0, digest, ReportKind::premise);
    r.note = assumption.pointwise_ok ? "pointwise" : "psd fallback";
    ctx.reports.push_back(std::move(r));
  }

  const auto dec = guarded("decompose", [&] { return decompose(mu, gm.mix); });
  ctx.reports.push_back(make_report("decomposition.recomposition", dec.recomposition_residual,
                                    1e-12, digest, ReportKind::parameter_free));
  ctx.reports.push_back(make_report("decomposition.rn_key", dec.rn_key_residual, 1e-12, digest,
                                    ReportKind::parameter_free));
  const auto hull = guarded("kl_to_hull", [&] { return kl_to_hull(mu, gm.mix); });
  ctx.reports.push_back(make_report("kl_to_hull.rlsi_bound", hull.value, hull.rlsi_bound, digest,
                                    ReportKind::parameter_free));
  {
    auto r = make_report("kl_to_hull.em_monotone", hull.monotone ? 0.0 : 1.0, 0.0, digest,
                         ReportKind::parameter_free);
    r.note = "largest raw per-step increase " + io::format_double(hull.max_increase);
    ctx.reports.push_back(std::move(r));
  }

  if (!alpha) {
    // T_c <= max c * TV <= max c * sqrt(2 C_P FI) on each component.
    const double cp = guarded("spectral_gap", [&] { return component_poincare_constant(gm); });
    alpha = AlphaFunction::power(cost.max_cost() * std::sqrt(2.0 * cp), 2.0);
    alpha_prov = cost.zero_diagonal() ? Provenance::exact : Provenance::estimated;
  }
  append(ctx.reports, guarded("verify_reweighted_ti", [&] {
           return verify_reweighted_ti(mu, gm, cost, *alpha, alpha_prov, probe);
         }));

  if (estimate && !lsi.C && !lsi.C_prime) {
    lsi.C = guarded("estimate_lsi_constant", [&] {
      return estimate_component_constant(gm, LsiMode::lsi, ctx.stamp.seed);
    });
    lsi.C_prime = guarded("estimate_lsi_constant", [&] {
      return estimate_component_constant(gm, LsiMode::mlsi, ctx.stamp.seed);
    });
    lsi.provenance = Provenance::estimated;
  } else if (lsi.C && !lsi.C_prime) {
    lsi.C_prime = *lsi.C / 4.0;
  }
  append(ctx.reports,
         guarded("verify_reweighted_lsi", [&] { return verify_reweighted_lsi(mu, gm, lsi); }));

  if (gm.parent.space().has_metric()) {
    const auto metric = CostMatrix::from_space(gm.parent.space_ptr(), CostKind::metric);
    append(ctx.reports,
           guarded("verify_corollaries", [&] { return verify_corollaries(mu, gm, metric, cor); }));
  } else {
    ctx.warn("corollaries skipped: the state space has no metric");
  }

  write_result(ctx, "verify.json",
               {{"measure", io::to_json(mu)},
                {"lambda_star", io::to_json(dec.lambda_star)},
                {"kl_to_hull", {{"value", hull.value},
                                {"lambda_hat", io::to_json(hull.lambda_hat)},
                                {"iterations", hull.iterations},
                                {"converged", hull.converged}}},
                {"alpha", alpha->describe()},
                {"assumption", {{"pointwise_ok", assumption.pointwise_ok},
                                {"psd_ok", assumption.psd_ok},
                                {"entropy_form_ok", assumption.entropy_form_ok},
                                {"min_slack", assumption.min_slack}}}});
  archive_reports(ctx);
}

void run_evolve(ObjectReader& cfg, Context& ctx) {
  const auto model = load_model(cfg, ctx);
  const auto& gm = model.gm;
  const auto mu0 = read_measure(cfg, "mu0", gm, ctx.stamp.seed, "component");
  const double horizon = cfg.positive("horizon", 10.0);
  const auto steps = cfg.count("steps", 200);
  if (steps < 2) throw ConfigError(cfg.path("steps") + ": must be at least 2");
  auto c_prime = optional_positive(cfg, "C_prime");
  auto prov = read_provenance(cfg, "provenance", Provenance::user_supplied);
  const bool dissipation = cfg.flag("dissipation", true);
  cfg.finish();

  archive_model(ctx, model);
  if (!c_prime) {
    c_prime = guarded("estimate_lsi_constant", [&] {
      return estimate_component_constant(gm, LsiMode::mlsi, ctx.stamp.seed);
    });
    prov = Provenance::estimated;
    if (!(*c_prime > 0.0)) c_prime = 1.0;
  }
  const auto times = uniform_times(horizon, steps);
  const auto trace = guarded("evolve", [&] { return evolve(gm.parent, mu0, times, &gm); });
  io::Stamp stamp = ctx.stamp;
  write_trace_csv(ctx.file("trace.csv"), stamp, trace);

  if (dissipation) {
    const double dt = times[1] - times[0];
    bool ok = true;
    if (gm.parent.irreducible() && gm.parent.support_size() > 1) {
      const double gap = guarded("spectral_gap", [&] { return spectral_gap(gm.parent); });
      ok = dt <= 0.1 / gap * (1.0 + 1e-12);
    }
    if (ok)
      append(ctx.reports,
             guarded("dissipation_check", [&] { return dissipation_check(trace, gm.parent); }));
    else
      ctx.warn("dissipation check skipped: time step exceeds 0.1/gap; raise steps");
  }
  append(ctx.reports, guarded("metastability_report", [&] {
           return metastability_report(trace, gm, *c_prime, prov);
         }));

  if (ctx.plots) {
    svg::line_plot(ctx.file("trace.svg"), stamp, "relative entropy along the semigroup", "t",
                   {{"KL(mu_t||pi)", trace.times, trace.kl_t},
                    {"KL(mu_t||hull)", trace.times, trace.kl_hull_t},
                    {"KL(lambda_t||w)", trace.times, trace.kl_weights_t},
                    {"delta(t)", trace.times, trace.delta_t}});
  }
  write_result(ctx, "evolve.json",
               {{"C_prime", *c_prime},
                {"C_prime_provenance", to_string(prov)},
                {"horizon", horizon},
                {"steps", steps},
                {"max_renormalization", trace.max_renormalization},
                {"final", io::to_json(trace.states.back())}});
  archive_reports(ctx);
}

void write_coupling(Context& ctx, const std::string& name, const Coupling& g) {
  io::CsvWriter csv(ctx.file(name), ctx.stamp, {"x", "y", "gamma"});
  for (std::size_t x = 0; x < g.n; ++x)
    for (std::size_t y = 0; y < g.n; ++y)
      if (g(x, y) != 0.0)
        csv.row_text({std::to_string(x), std::to_string(y), io::format_double(g(x, y))});
}

void write_potentials(Context& ctx, const std::string& name, const std::vector<double>& f,
                      const std::vector<double>& g) {
  io::CsvWriter csv(ctx.file(name), ctx.stamp, {"x", "f", "g"});
  for (std::size_t x = 0; x < f.size(); ++x)
    csv.row_text({std::to_string(x), io::format_double(f[x]), io::format_double(g[x])});
}

void run_transport(ObjectReader& cfg, Context& ctx) {
  const auto model = load_model(cfg, ctx);
  const auto& gm = model.gm;
  const auto mu = read_measure(cfg, "measure", gm, ctx.stamp.seed, "random");
  const bool target_is_parent = !cfg.has("target");
  const auto target = read_measure(cfg, "target", gm, ctx.stamp.seed, "component");
  const auto nu = target_is_parent ? gm.parent.stationary() : target;
  const auto cost = read_cost(cfg, "cost", gm, ctx);
  cfg.finish();

  archive_model(ctx, model);
  const auto digest = inputs_digest(mu, gm);
  const auto ot = guarded("ot_cost", [&] { return ot_cost(mu, nu, cost); });
  const auto hull = guarded("ot_to_hull", [&] { return ot_to_hull(mu, gm.mix, cost); });
  const auto dual = guarded("dual_to_hull", [&] { return dual_to_hull(mu, gm.mix, cost); });
  const auto tv = guarded("tv_to_hull", [&] { return tv_to_hull(mu, gm.mix); });

  ctx.reports.push_back(make_report("transport.ot_cost.duality_gap", std::abs(ot.duality_gap),
                                    1e-6 * (1.0 + std::abs(ot.value)), digest,
                                    ReportKind::parameter_free));
  ctx.reports.push_back(make_report("transport.ot_to_hull.duality_gap",
                                    std::abs(hull.duality_gap),
                                    1e-6 * (1.0 + std::abs(hull.value)), digest,
                                    ReportKind::parameter_free));
  ctx.reports.push_back(make_report("transport.dual_equals_primal",
                                    std::abs(dual.value - hull.value),
                                    1e-6 * (1.0 + std::abs(hull.value)), digest,
                                    ReportKind::parameter_free));
  if (target_is_parent)
    ctx.reports.push_back(make_report("transport.hull_below_parent", hull.value, ot.value,
                                      digest, ReportKind::parameter_free));

  write_coupling(ctx, "coupling_ot.csv", ot.coupling);
  write_potentials(ctx, "potentials_ot.csv", ot.f, ot.g);
  write_coupling(ctx, "coupling_hull.csv", hull.coupling);
  write_potentials(ctx, "potentials_hull.csv", hull.f, hull.g);
  write_result(ctx, "transport.json",
               {{"ot_cost", {{"value", ot.value}, {"duality_gap", ot.duality_gap},
                             {"iterations", ot.iterations}}},
                {"ot_to_hull", {{"value", hull.value},
                                {"duality_gap", hull.duality_gap},
                                {"lambda_hat", io::to_json(hull.lambda_hat)},
                                {"iterations", hull.iterations}}},
                {"dual_to_hull", {{"value", dual.value},
                                  {"conjugate_value", dual.conjugate_value},
                                  {"active_component", dual.active_component}}},
                {"tv_to_hull", {{"value", tv.value}, {"lambda_hat", io::to_json(tv.lambda_hat)}}}});
  archive_reports(ctx);
}

std::vector<double> read_observable(ObjectReader& cfg, const GeneratorMixture& gm) {
  const auto& space = gm.parent.space();
  if (!cfg.has("f") || (cfg.raw("f").is_string() && cfg.text("f") == "coordinate")) {
    if (!space.has_coords())
      throw ConfigError(cfg.path("f") + ": the model has no coordinates; give f as an array");
    return {space.coords().begin(), space.coords().end()};
  }
  if (cfg.raw("f").is_string())
    throw ConfigError(cfg.path("f") + ": expected \"coordinate\" or an array");
  auto f = cfg.reals("f");
  if (f.size() != space.size())
    throw ConfigError(cfg.path("f") + ": expected " + std::to_string(space.size()) + " entries");
  return f;
}

void run_concentration(ObjectReader& cfg, Context& ctx) {
  const auto model = load_model(cfg, ctx);
  const auto& gm = model.gm;
  const auto mu0 = read_measure(cfg, "mu0", gm, ctx.stamp.seed, "component");
  const auto f = read_observable(cfg, gm);
  const double horizon = cfg.positive("horizon", 20.0);
  const auto count = cfg.count("count", 10000);
  if (count < 2) throw ConfigError(cfg.path("count") + ": must be at least 2");
  auto C = optional_positive(cfg, "C");
  auto prov = read_provenance(cfg, "provenance", Provenance::user_supplied);
  const auto probes = cfg.count("probes", 200);
  const auto thresholds = cfg.reals("thresholds", {});
  for (std::size_t k = 0; k < thresholds.size(); ++k)
    if (!(thresholds[k] > 0.0))
      throw ConfigError(cfg.path("thresholds") + "[" + std::to_string(k) + "]: must be positive");
  cfg.finish();

  archive_model(ctx, model);
  if (!C) {
    C = guarded("probe_w1_constant", [&] {
      return probe_w1_constant(gm, static_cast<int>(probes), ctx.stamp.seed);
    });
    prov = Provenance::estimated;
  }
  const auto rep = guarded("concentration_experiment", [&] {
    return concentration_experiment(gm, mu0, f, horizon, count, ctx.stamp.seed, *C, prov,
                                    thresholds);
  });
  const auto digest = inputs_digest(mu0, gm);
  for (const auto& row : rep.rows) {
    char name[64];
    std::snprintf(name, sizeof name, "concentration.tail[r=%.4g]", row.r);
    ctx.reports.push_back(make_report(name, row.empirical, row.bound + row.slack, digest,
                                      ReportKind::constant, {{"C", *C, prov}}));
  }
  write_result(ctx, "concentration.json", rep.to_json());
  if (ctx.plots) {
    std::vector<double> r, emp, bound;
    for (const auto& row : rep.rows) {
      r.push_back(row.r);
      emp.push_back(row.empirical);
      bound.push_back(std::min(1.0, row.bound));
    }
    svg::line_plot(ctx.file("tail.svg"), ctx.stamp, "time-average tail against the bound", "r",
                   {{"empirical", r, emp}, {"bound", r, bound}});
  }
  archive_reports(ctx);
}

void run_constants(ObjectReader& cfg, Context& ctx) {
  const auto model = load_model(cfg, ctx);
  const auto& gm = model.gm;
  const auto starts = cfg.count("starts", 32);
  const auto probes = cfg.count("probes", 200);
  cfg.finish();

  archive_model(ctx, model);
  auto describe = [&](const ReversibleGenerator& g) {
    Json j{{"support_size", g.support_size()}, {"irreducible", g.irreducible()}};
    if (!g.irreducible() || g.support_size() < 2) return j;
    LsiEstimateOptions opt;
    opt.seed = ctx.stamp.seed;
    opt.random_starts = static_cast<int>(starts);
    const double gap = guarded("spectral_gap", [&] { return spectral_gap(g); });
    const auto lsi = guarded("estimate_lsi_constant",
                             [&] { return estimate_lsi_constant(g, LsiMode::lsi, opt); });
    const auto mlsi = guarded("estimate_lsi_constant",
                              [&] { return estimate_lsi_constant(g, LsiMode::mlsi, opt); });
    j["spectral_gap"] = gap;
    j["poincare"] = 1.0 / gap;
    j["lsi_lower_bound"] = lsi.lower_bound;
    j["mlsi_lower_bound"] = mlsi.lower_bound;
    return j;
  };
  Json comps = Json::array();
  for (std::size_t i = 0; i < gm.components.size(); ++i) {
    comps.push_back(describe(gm.components[i]));
    *ctx.log << "component " << i << ": " << io::dump(comps.back()) << '\n';
  }
  Json result{{"components", comps}, {"parent", describe(gm.parent)}};
  *ctx.log << "parent: " << io::dump(result["parent"]) << '\n';
  if (gm.parent.space().has_metric()) {
    result["w1_hull_constant_probe"] = guarded("probe_w1_constant", [&] {
      return probe_w1_constant(gm, static_cast<int>(probes), ctx.stamp.seed);
    });
    *ctx.log << "W1 hull constant probe: "
             << io::format_double(result["w1_hull_constant_probe"].get<double>()) << '\n';
  }
  write_result(ctx, "constants.json", result);
}

void balcheerd_reports(Context& ctx, const BalCheErdReport& rep) {
  Digest d;
  d.add(rep.m).add(rep.grid.lo).add(rep.grid.hi).add(static_cast<std::uint64_t>(rep.grid.n));
  const auto digest = d.hex();
  const std::string tag = "[m=" + io::format_double(rep.m) + "]";
  ctx.reports.push_back(make_report("balcheerd.kl_hull" + tag, rep.kl_hull,
                                    2.0 * rep.continuum.fi + 1e-9, digest, ReportKind::constant,
                                    {{"C", 2.0, Provenance::exact}}));
  ctx.reports.push_back(make_report("balcheerd.w2_witness" + tag, rep.w2sq_witness,
                                    4.0 * rep.continuum.fi + 1e-6, digest, ReportKind::constant,
                                    {{"C", 4.0, Provenance::exact}}));
}

void run_balcheerd(ObjectReader& cfg, Context& ctx) {
  const double m = cfg.nonnegative("m", 4.0);
  const auto grid = read_grid(cfg, "grid", {-12.0, 12.0, 801});
  cfg.finish();
  const auto rep = guarded("balcheerd_report", [&] { return balcheerd_report(m, grid); });
  balcheerd_reports(ctx, rep);
  write_result(ctx, "balcheerd.json", rep.to_json());
  if (ctx.plots) {
    const GaussianMixture1D pi{{-m, m}, {}, {0.5, 0.5}};
    const GaussianMixture1D mu{{-m, m}, {}, {0.75, 0.25}};
    const GaussianMixture1D wit{{-m, m}, {}, rep.lambda_star};
    const auto xs = grid.points();
    auto curve = [&](const GaussianMixture1D& g) {
      std::vector<double> y;
      for (double x : xs) y.push_back(std::exp(g.log_density(x)));
      return y;
    };
    svg::line_plot(ctx.file("densities.svg"), ctx.stamp, "densities", "x",
                   {{"pi", xs, curve(pi)}, {"mu", xs, curve(mu)}, {"lambda* mixture", xs, curve(wit)}});
  }
  archive_reports(ctx);
}

void run_sweep(ObjectReader& cfg, Context& ctx) {
  const auto ms = cfg.reals("ms", {0.0, 1.0, 2.0, 3.0, 4.0, 5.0});
  for (std::size_t k = 0; k < ms.size(); ++k)
    if (!(ms[k] >= 0.0))
      throw ConfigError(cfg.path("ms") + "[" + std::to_string(k) + "]: must be nonnegative");
  const auto grid = read_grid(cfg, "grid", {-12.0, 12.0, 801});
  cfg.finish();
  std::vector<BalCheErdReport> rows;
  for (double m : ms) {
    rows.push_back(guarded("balcheerd_report", [&] { return balcheerd_report(m, grid); }));
    balcheerd_reports(ctx, rows.back());
  }
  write_sweep_csv(ctx.file("sweep.csv"), ctx.stamp, rows);
  if (ctx.plots) {
    std::vector<double> kl, fi, hull;
    for (const auto& r : rows) {
      kl.push_back(r.continuum.kl);
      fi.push_back(r.continuum.fi);
      hull.push_back(r.kl_hull);
    }
    svg::line_plot(ctx.file("sweep.svg"), ctx.stamp, "divergences against separation", "m",
                   {{"KL(mu||pi)", ms, kl}, {"FI(mu||pi)", ms, fi}, {"KL(mu||hull)", ms, hull}});
  }
  archive_reports(ctx);
}

using Runner = void (*)(ObjectReader&, Context&);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table{
      {"verify", run_verify},       {"evolve", run_evolve},
      {"transport", run_transport}, {"concentration", run_concentration},
      {"constants", run_constants}, {"balcheerd", run_balcheerd},
      {"sweep", run_sweep}};
  return table;
}

}  // namespace

const std::vector<std::string>& experiments() {
  static const std::vector<std::string> names{"verify",    "evolve",    "transport", "concentration",
                                              "constants", "balcheerd", "sweep"};
  return names;
}

int run(const Options& options, std::ostream& out, std::ostream& err) {
  try {
    const auto it = runners().find(options.experiment);
    if (it == runners().end())
      throw ConfigError("unknown experiment '" + options.experiment + "'");
    Json cfg = Json::object();
    fs::path config_dir = ".";
    if (options.config) {
      cfg = read_json_file(*options.config, "config");
      config_dir = fs::path(*options.config).parent_path();
      if (config_dir.empty()) config_dir = ".";
    }
    if (!cfg.is_object()) throw ConfigError("config: expected a JSON object");
    ObjectReader reader(cfg, "config");
    if (reader.has("experiment") && reader.text("experiment") != options.experiment)
      throw ConfigError("config.experiment: '" + reader.text("experiment") +
                        "' does not match the subcommand '" + options.experiment + "'");
    const std::uint64_t seed = options.seed ? *options.seed : reader.count("seed", 1);
    if (reader.has("seed")) reader.count("seed");
    const std::string config_out = reader.text("out", "out");
    const std::string out_dir = options.out ? *options.out : config_out;
    if (options.threads < 0) throw ConfigError("--threads: must be nonnegative");
    set_thread_count(options.threads);

    Context ctx;
    ctx.experiment = options.experiment;
    ctx.config_dir = config_dir;
    ctx.out_dir = out_dir;
    ctx.stamp = {Digest().add(std::string_view(options.experiment)).add(io::dump(cfg)).hex(), seed};
    ctx.plots = options.plots;
    ctx.log = &out;
    ctx.err = &err;
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec) throw ConfigError("--out: cannot create " + out_dir + " (" + ec.message() + ")");

    it->second(reader, ctx);
    const int status = exit_status(ctx);
    std::size_t failed = 0;
    for (const auto& r : ctx.reports) failed += r.pass ? 0 : 1;
    out << options.experiment << ": " << ctx.reports.size() << " reports, " << failed
        << " not passing; wrote";
    for (const auto& f : ctx.written) out << ' ' << f;
    out << " to " << out_dir << " (config " << ctx.stamp.config_digest << ", seed " << seed
        << ")\n";
    return status;
  } catch (const ConfigError& e) {
    err << "schema error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const Json::exception& e) {
    err << "schema error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const NumericFailure& e) {
    err << "numeric failure in " << e.op() << ": " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace mixlab::cli
