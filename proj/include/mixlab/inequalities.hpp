#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mixlab/dirichlet.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/report.hpp"
#include "mixlab/transport.hpp"

namespace mixlab {

struct TiProbeOptions {
  int probes = 200;
  std::uint64_t seed = 1;
  Policy policy = Policy::parallel;
};

// Worst ratio alpha(T_c(nu, pi_i)) / FI_i(nu || pi_i) over random nu << pi_i.
// A ratio <= 1 means the component premise held on every probe; it is a probe,
// not a proof.
struct ComponentTiProbe {
  std::size_t component = 0;
  double worst_ratio = 0.0;
  int probes = 0;
  bool certified() const { return worst_ratio <= 1.0 + 1e-9; }
};

ComponentTiProbe probe_component_ti(const ReversibleGenerator& component,
                                    const CostMatrix& c, const AlphaFunction& alpha,
                                    std::size_t index, const TiProbeOptions& options = {});

/// Reports, in order: one premise probe per component, then
///   reweighted_ti.end_to_end      alpha(T_c(mu, hull)) <= FI(mu||pi)
///   reweighted_ti.convexity       alpha(T_c(mu, hull)) <= sum lambda*_i alpha(T_c(mu_i, pi_i))
///   reweighted_ti.form_domination sum w_i E_i(sqrt f, sqrt f) <= FI(mu||pi)
///   reweighted_ti.witness         alpha(T_c(mu, sum lambda*_i pi_i)) <= FI(mu||pi)
/// Throws PreconditionError when the mixture fails check_assumption.
std::vector<InequalityReport> verify_reweighted_ti(
    const FiniteMeasure& mu, const GeneratorMixture& gm, const CostMatrix& c,
    const AlphaFunction& alpha, Provenance alpha_provenance = Provenance::user_supplied,
    const TiProbeOptions& options = {});

struct LsiConstants {
  std::optional<double> C;        // component LSI constant
  std::optional<double> C_prime;  // component MLSI constant
  Provenance provenance = Provenance::user_supplied;
};

/// Reports: reweighted_lsi.hull_bound (parameter-free), .lsi, .mlsi (when the
/// matching constant is given) and .identity (entropy chain rule residual).
std::vector<InequalityReport> verify_reweighted_lsi(const FiniteMeasure& mu,
                                                    const GeneratorMixture& gm,
                                                    const LsiConstants& constants);

struct CorollaryConstants {
  std::optional<double> C_talagrand;
  Provenance talagrand_provenance = Provenance::user_supplied;
  // Defaults to max_i 1/gap_i computed exactly.
  std::optional<double> C_poincare;
  Provenance poincare_provenance = Provenance::user_supplied;
  std::uint64_t seed = 1;
  int poincare_samples = 50;
};

double component_poincare_constant(const GeneratorMixture& gm);

std::vector<InequalityReport> verify_corollaries(const FiniteMeasure& mu,
                                                 const GeneratorMixture& gm,
                                                 const CostMatrix& c_metric,
                                                 const CorollaryConstants& constants = {});

// Digest of (mu, mixture) used to tag reports.
std::string inputs_digest(const FiniteMeasure& mu, const GeneratorMixture& gm);

}  // namespace mixlab
