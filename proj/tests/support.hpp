#pragma once

#include <cmath>
#include <vector>

#include "mixlab/measure.hpp"
#include "mixlab/rng.hpp"

namespace testkit {

using mixlab::CounterRng;
using mixlab::FiniteMeasure;
using mixlab::MixtureModel;
using mixlab::SpacePtr;

// Random probability vector; each entry is zeroed with probability `holes`
// (at least one entry survives).
inline std::vector<double> random_mass(CounterRng& rng, std::size_t n, double holes = 0.0) {
  std::vector<double> p = mixlab::random_simplex(rng, n, 0.7);
  std::size_t keep = rng.below(n);
  for (std::size_t x = 0; x < n; ++x)
    if (x != keep && rng.uniform() < holes) p[x] = 0.0;
  return p;
}

inline FiniteMeasure random_measure(CounterRng& rng, const SpacePtr& space, double holes = 0.0) {
  return FiniteMeasure(space, random_mass(rng, space->size(), holes));
}

// m components on n states; component supports may overlap or be partial.
inline MixtureModel random_mixture(CounterRng& rng, const SpacePtr& space, std::size_t m,
                                   double holes = 0.3) {
  std::vector<FiniteMeasure> comps;
  for (std::size_t i = 0; i < m; ++i) comps.push_back(random_measure(rng, space, holes));
  return MixtureModel(std::move(comps),
                      FiniteMeasure::on_indices(mixlab::random_simplex(rng, m)));
}

// Measure absolutely continuous w.r.t. `ref`.
inline FiniteMeasure random_dominated_measure(CounterRng& rng, const FiniteMeasure& ref) {
  std::vector<double> p(ref.size());
  for (std::size_t x = 0; x < ref.size(); ++x)
    p[x] = ref[x] > 0.0 ? ref[x] * rng.exponential() : 0.0;
  return FiniteMeasure(ref.space_ptr(), p);
}

// Independent summation oracles.
inline double naive_kl(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return INFINITY;
    s += p[i] * std::log(p[i] / q[i]);
  }
  return s;
}

}  // namespace testkit
