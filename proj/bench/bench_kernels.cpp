// Times each OpenMP kernel against its serial reference and checks that both
// paths return the same bits. Usage: bench_kernels [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "mixlab/dynamics.hpp"
#include "mixlab/inequalities.hpp"
#include "mixlab/model_zoo.hpp"
#include "mixlab/parallel.hpp"

using namespace mixlab;

namespace {

double best_of(int repeats, const std::function<double()>& fn, double* result) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    *result = fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

bool row(const char* name, int repeats, const std::function<double(Policy)>& kernel) {
  double serial_value = 0.0, parallel_value = 0.0;
  const double ts = best_of(repeats, [&] { return kernel(Policy::serial); }, &serial_value);
  const double tp = best_of(repeats, [&] { return kernel(Policy::parallel); }, &parallel_value);
  const bool same = serial_value == parallel_value;
  std::printf("%-34s %10.4f %10.4f %8.2fx  %s\n", name, ts, tp, ts / tp,
              same ? "identical" : "MISMATCH");
  return same;
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
  std::printf("threads: %d, best of %d\n", thread_count(), repeats);
  std::printf("%-34s %10s %10s %9s\n", "kernel", "serial s", "openmp s", "speedup");

  const auto well = build_double_well({3.0, {-2.0, 2.0, 41}, 0.0});
  const auto coords = well.parent.space().coords();
  const std::vector<double> f(coords.begin(), coords.end());
  IsingParams ip;
  ip.n = 8;
  ip.beta = 1.0;
  const auto ising = build_ising_glauber(ip);
  RandomDominatedParams rp;
  rp.n = 30;
  rp.m = 3;
  const auto random = build_random_dominated(rp);

  bool ok = true;
  ok &= row("gillespie 2e4 trajectories", repeats, [&](Policy p) {
    return simulate_time_average(well.parent, well.mix.component(0), f, 20.0, 20000, 1, p).mean();
  });
  ok &= row("lsi multi-start (ising n=8)", repeats, [&](Policy p) {
    LsiEstimateOptions o;
    o.policy = p;
    return estimate_lsi_constant(ising.parent, LsiMode::lsi, o).lower_bound;
  });
  ok &= row("component TI probes (random n=30)", repeats, [&](Policy p) {
    const auto c = CostMatrix::from_space(random.parent.space_ptr(), CostKind::metric);
    TiProbeOptions o;
    o.probes = 100;
    o.policy = p;
    return probe_component_ti(random.components[0], c, AlphaFunction::power(1.0, 2.0), 0, o)
        .worst_ratio;
  });
  ok &= row("W1 hull probes (double well)", repeats,
            [&](Policy p) { return probe_w1_constant(well, 100, 1, p); });
  return ok ? 0 : 1;
}
