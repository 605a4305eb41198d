#include "mixlab/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixlab/error.hpp"
#include "mixlab/rng.hpp"

namespace mixlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool dominated(const FiniteMeasure& mu, const FiniteMeasure& pi) {
  for (std::size_t x = 0; x < mu.size(); ++x)
    if (mu[x] > 0.0 && pi[x] == 0.0) return false;
  return true;
}

FiniteMeasure probe_measure(CounterRng& rng, const FiniteMeasure& pi, int k) {
  std::vector<double> v(pi.size(), 0.0);
  if (k % 2 == 0) {
    for (std::size_t x = 0; x < pi.size(); ++x)
      if (pi[x] > 0.0) v[x] = std::pow(rng.exponential(), 1.0 / 0.7);
  } else {
    const double spread = rng.uniform(0.05, 2.0);
    for (std::size_t x = 0; x < pi.size(); ++x)
      if (pi[x] > 0.0) v[x] = pi[x] * std::exp(spread * rng.normal());
  }
  return FiniteMeasure(pi.space_ptr(), std::move(v));
}

// sum_i w_i E_i(sqrt f, sqrt f) with f = dmu/dpi.
double weighted_component_forms(const FiniteMeasure& mu, const GeneratorMixture& gm) {
  const auto f = density(mu, gm.parent.stationary());
  std::vector<double> r(f.size());
  for (std::size_t x = 0; x < f.size(); ++x) r[x] = std::sqrt(f[x]);
  double s = 0.0;
  for (std::size_t i = 0; i < gm.components.size(); ++i)
    s += gm.mix.weights()[i] * dirichlet_form(gm.components[i], r, r);
  return s;
}

void require_assumption(const GeneratorMixture& gm, bool pointwise) {
  const auto a = check_assumption(gm);
  if (pointwise && !a.pointwise_ok)
    throw PreconditionError("Assumption 1 pointwise check failed (min slack " +
                            std::to_string(a.min_slack) + ")");
  if (!a.psd_ok)
    throw PreconditionError("Assumption 1 quadratic-form check failed");
}

}  // namespace

std::string inputs_digest(const FiniteMeasure& mu, const GeneratorMixture& gm) {
  Digest d;
  d.add(mu.mass());
  d.add(gm.mix.weights().mass());
  for (const auto& g : gm.components) {
    d.add(g.stationary().mass());
    for (const auto& e : g.edges())
      d.add(static_cast<std::uint64_t>(e.x)).add(static_cast<std::uint64_t>(e.y)).add(e.c);
  }
  for (const auto& e : gm.parent.edges())
    d.add(static_cast<std::uint64_t>(e.x)).add(static_cast<std::uint64_t>(e.y)).add(e.c);
  return d.hex();
}

ComponentTiProbe probe_component_ti(const ReversibleGenerator& component,
                                    const CostMatrix& c, const AlphaFunction& alpha,
                                    std::size_t index, const TiProbeOptions& options) {
  const auto& pi = component.stationary();
  std::vector<double> ratio(options.probes, 0.0);
  auto one = [&](int k) {
    auto rng = CounterRng::stream(options.seed ^ (0x51ed2700ULL + index), k);
    const auto nu = probe_measure(rng, pi, k);
    const double fi = fisher_information(nu, component);
    const double lhs = alpha(ot_cost(nu, pi, c).value);
    if (lhs <= 0.0) return 0.0;
    return fi > 0.0 ? lhs / fi : kInf;
  };
  if (options.policy == Policy::parallel) {
    ExceptionTrap trap;
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < options.probes; ++k) trap.guard(k, [&] { ratio[k] = one(k); });
    trap.rethrow();
  } else {
    for (int k = 0; k < options.probes; ++k) ratio[k] = one(k);
  }
  ComponentTiProbe out;
  out.component = index;
  out.probes = options.probes;
  for (double r : ratio) out.worst_ratio = std::max(out.worst_ratio, r);
  return out;
}

std::vector<InequalityReport> verify_reweighted_ti(const FiniteMeasure& mu,
                                                   const GeneratorMixture& gm,
                                                   const CostMatrix& c,
                                                   const AlphaFunction& alpha,
                                                   Provenance alpha_provenance,
                                                   const TiProbeOptions& options) {
  require_assumption(gm, false);
  const auto& mix = gm.mix;
  const std::string digest = inputs_digest(mu, gm);
  const std::vector<ConstantUsed> alpha_const{
      {"alpha:" + alpha.describe(), alpha.scale(), alpha_provenance}};

  std::vector<InequalityReport> out;
  for (std::size_t i = 0; i < gm.components.size(); ++i) {
    const auto probe = probe_component_ti(gm.components[i], c, alpha, i, options);
    auto r = make_report("reweighted_ti.component_probe[" + std::to_string(i) + "]",
                         probe.worst_ratio, 1.0, digest, ReportKind::premise,
                         alpha_const);
    r.note = "probed on " + std::to_string(probe.probes) + " random measures, not proven";
    out.push_back(std::move(r));
  }

  if (!dominated(mu, mix.parent())) {
    for (const char* name : {"reweighted_ti.end_to_end", "reweighted_ti.convexity",
                             "reweighted_ti.form_domination", "reweighted_ti.witness"}) {
      auto r = make_report(name, kInf, kInf, digest, ReportKind::parameter_free);
      r.note = "mu is not absolutely continuous w.r.t. pi";
      out.push_back(std::move(r));
    }
    return out;
  }

  const double fi = fisher_information(mu, gm.parent);
  const auto hull = ot_to_hull(mu, mix, c);
  const double lhs_hull = alpha(hull.value);

  const auto dec = decompose(mu, mix);
  double convex_rhs = 0.0;
  for (std::size_t i = 0; i < mix.num_components(); ++i) {
    const double l = dec.lambda_star[i];
    if (l == 0.0) continue;
    convex_rhs += l * alpha(ot_cost(dec.conditionals[i], mix.component(i), c).value);
  }
  const double witness = alpha(ot_cost(mu, mix.reweighted(dec.lambda_star), c).value);

  out.push_back(make_report("reweighted_ti.end_to_end", lhs_hull, fi, digest,
                            ReportKind::constant, alpha_const));
  out.push_back(make_report("reweighted_ti.convexity", lhs_hull, convex_rhs, digest,
                            ReportKind::parameter_free));
  out.push_back(make_report("reweighted_ti.form_domination",
                            weighted_component_forms(mu, gm), fi, digest,
                            ReportKind::parameter_free));
  out.push_back(make_report("reweighted_ti.witness", witness, fi, digest,
                            ReportKind::constant, alpha_const));
  return out;
}

std::vector<InequalityReport> verify_reweighted_lsi(const FiniteMeasure& mu,
                                                    const GeneratorMixture& gm,
                                                    const LsiConstants& constants) {
  require_assumption(gm, constants.C_prime.has_value());
  const auto& mix = gm.mix;
  const std::string digest = inputs_digest(mu, gm);
  std::vector<InequalityReport> out;

  if (!dominated(mu, mix.parent())) {
    const char* note = "KL(mu||pi) is infinite";
    auto a = make_report("reweighted_lsi.hull_bound", kInf, kInf, digest,
                         ReportKind::parameter_free);
    a.note = note;
    out.push_back(a);
    if (constants.C) {
      auto b = make_report("reweighted_lsi.lsi", kInf, kInf, digest, ReportKind::constant,
                           {{"C", *constants.C, constants.provenance}});
      b.note = note;
      out.push_back(b);
    }
    if (constants.C_prime) {
      auto b = make_report("reweighted_lsi.mlsi", kInf, kInf, digest, ReportKind::constant,
                           {{"C_prime", *constants.C_prime, constants.provenance}});
      b.note = note;
      out.push_back(b);
    }
    return out;
  }

  const auto ent = entropy_decomposition(mu, mix);
  const double bound = ent.kl_total - ent.kl_weights;
  const auto hull = kl_to_hull(mu, mix);
  out.push_back(make_report("reweighted_lsi.hull_bound", hull.value, bound, digest,
                            ReportKind::parameter_free));
  if (constants.C) {
    const double fi = fisher_information(mu, gm.parent);
    out.push_back(make_report("reweighted_lsi.lsi", bound, *constants.C * fi, digest,
                              ReportKind::constant,
                              {{"C", *constants.C, constants.provenance}}));
  }
  if (constants.C_prime) {
    const double ep = entropy_production(mu, gm.parent);
    out.push_back(make_report("reweighted_lsi.mlsi", bound, *constants.C_prime * ep,
                              digest, ReportKind::constant,
                              {{"C_prime", *constants.C_prime, constants.provenance}}));
  }
  out.push_back(make_report("reweighted_lsi.identity", ent.residual, 1e-10, digest,
                            ReportKind::parameter_free));
  return out;
}

double component_poincare_constant(const GeneratorMixture& gm) {
  double c = 0.0;
  for (const auto& g : gm.components) {
    const double gap = spectral_gap(g);
    if (std::isfinite(gap)) c = std::max(c, 1.0 / gap);
  }
  return c;
}

std::vector<InequalityReport> verify_corollaries(const FiniteMeasure& mu,
                                                 const GeneratorMixture& gm,
                                                 const CostMatrix& c_metric,
                                                 const CorollaryConstants& constants) {
  require_assumption(gm, false);
  const auto& mix = gm.mix;
  const std::string digest = inputs_digest(mu, gm);
  std::vector<InequalityReport> out;

  const double cp = constants.C_poincare ? *constants.C_poincare
                                         : component_poincare_constant(gm);
  const Provenance cp_prov =
      constants.C_poincare ? constants.poincare_provenance : Provenance::exact;
  const std::vector<ConstantUsed> cp_used{{"C_poincare", cp, cp_prov}};
  const bool finite = dominated(mu, mix.parent());

  if (constants.C_talagrand) {
    const std::vector<ConstantUsed> used{
        {"C_talagrand", *constants.C_talagrand, constants.talagrand_provenance}};
    if (finite) {
      const auto ent = entropy_decomposition(mu, mix);
      out.push_back(make_report("corollary.talagrand", ot_to_hull(mu, mix, c_metric).value,
                                *constants.C_talagrand * (ent.kl_total - ent.kl_weights),
                                digest, ReportKind::constant, used));
    } else {
      out.push_back(make_report("corollary.talagrand", kInf, kInf, digest,
                                ReportKind::constant, used));
    }
  }

  if (finite) {
    const double tv = tv_to_hull(mu, mix).value;
    out.push_back(make_report("corollary.tv", tv * tv,
                              4.0 * cp * fisher_information(mu, gm.parent), digest,
                              ReportKind::constant, cp_used));
  } else {
    out.push_back(make_report("corollary.tv", kInf, kInf, digest, ReportKind::constant,
                              cp_used));
  }

  CounterRng rng(constants.seed);
  double worst_margin = kInf;
  InequalityReport worst;
  const std::size_t n = mu.size();
  std::vector<double> g(n);
  for (int k = 0; k < constants.poincare_samples; ++k) {
    const double scale = rng.uniform(0.1, 10.0);
    for (auto& v : g) v = scale * rng.normal();
    auto r = make_report("corollary.reweighted_poincare",
                         reweighted_poincare_residual(g, gm),
                         cp * dirichlet_form(gm.parent, g, g), digest,
                         ReportKind::constant, cp_used);
    const double rel = r.margin / (1.0 + std::abs(r.rhs));
    if (k == 0 || rel < worst_margin) {
      worst_margin = rel;
      worst = r;
    }
  }
  if (constants.poincare_samples > 0) {
    worst.note = "worst of " + std::to_string(constants.poincare_samples) + " random g";
    out.push_back(worst);
  }
  return out;
}

}  // namespace mixlab
