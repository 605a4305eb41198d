#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace mixlab {

// Counter-based 64-bit generator: output k of stream `key` is
// splitmix64_finalize(key + k * golden). Streams for parallel work are derived
// from (seed, index) so results never depend on thread scheduling.
//
// All distributions are implemented here rather than taken from <random>,
// whose distribution algorithms are implementation-defined.
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit CounterRng(std::uint64_t seed) : key_(mix(seed)) {}

  static CounterRng stream(std::uint64_t seed, std::uint64_t index) {
    CounterRng rng(0);
    rng.key_ = mix(seed ^ mix(index + kGolden));
    return rng;
  }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() {
    ++counter_;
    return mix(key_ + counter_ * kGolden);
  }

  std::uint64_t counter() const { return counter_; }

  // [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // (0, 1]
  double uniform_open() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double exponential() { return -std::log(uniform_open()); }

  double normal() {
    const double u = uniform_open();
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
  }

  // Uniform integer in [0, n). Rejection keeps it exactly uniform.
  std::size_t below(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r;
    do {
      r = next();
    } while (r >= limit);
    return static_cast<std::size_t>(r % bound);
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Dirichlet(1,...,1)-like point on the simplex via normalized exponentials.
inline std::vector<double> random_simplex(CounterRng& rng, std::size_t n) {
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& v : p) {
    v = rng.exponential();
    total += v;
  }
  for (auto& v : p) v /= total;
  return p;
}

// shape < 1 pushes draws toward the corners of the simplex.
inline std::vector<double> random_simplex(CounterRng& rng, std::size_t n,
                                          double shape) {
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& v : p) {
    v = std::pow(rng.exponential(), 1.0 / shape);
    total += v;
  }
  for (auto& v : p) v /= total;
  return p;
}

}  // namespace mixlab
