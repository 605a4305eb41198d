#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mixlab/continuum1d.hpp"
#include "mixlab/dirichlet.hpp"
#include "mixlab/json_io.hpp"

namespace mixlab {

// Two states with Q(0,1) = a, Q(1,0) = b; a single component equal to the parent.
GeneratorMixture build_two_point(double a, double b);

struct BlockParams {
  // One two-point chain per block, rates (a, b) as in build_two_point.
  std::vector<std::array<double, 2>> rates{{1.0, 1.0}, {1.0, 1.0}};
  std::vector<double> weights;  // empty means uniform
  // Conductance on the edge joining consecutive blocks; 0 leaves the parent
  // reducible with disjoint component supports.
  double cut = 0.0;
};
GeneratorMixture build_block_mixture(const BlockParams& p);

struct DoubleWellParams {
  double depth = 3.0;
  Grid1D grid{-2.0, 2.0, 41};
  double split = 0.0;
};
// V(x) = depth (x^2 - 1)^2; components are the conditionals on x < split and
// x >= split with in-block moves only.
GeneratorMixture build_double_well(const DoubleWellParams& p,
                                   std::vector<std::string>* warnings = nullptr);
std::vector<double> double_well_potential(const DoubleWellParams& p);

// Throws ConfigError when the grid leaks more than 1e-10 of the mass.
GeneratorMixture build_gaussian_mixture_grid(const GaussianMixture1D& g,
                                             std::optional<Grid1D> grid = {});

struct IsingParams {
  std::size_t n = 4;
  double beta = 0.0;
  double h_field = 0.0;
  // "curie_weiss": H = -(1/n) sum_{i<j} s_i s_j - h sum s_i
  // "ring":        H = -sum_i s_i s_{i+1}     - h sum s_i
  std::string interaction = "curie_weiss";
  // "magnetization_sign" (M = 0 goes to the block of s_1), "single", or an
  // explicit block label per state in `blocks`.
  std::string partition = "magnetization_sign";
  std::vector<std::size_t> blocks;
};
// State index bit k holds spin k (1 for +1). Heat-bath single-spin flips.
GeneratorMixture build_ising_glauber(const IsingParams& p);
double ising_magnetization(std::size_t state, std::size_t n);

struct RandomDominatedParams {
  std::size_t n = 12;
  std::size_t m = 3;
  double slack = 0.1;
  double edge_probability = 0.2;
  double holes = 0.3;
  std::uint64_t seed = 1;
};
// Parent conductance = sum_i w_i c_i plus random slack on the path 0-1-...-(n-1).
GeneratorMixture build_random_dominated(const RandomDominatedParams& p);

/// Conditioned decomposition of a parent generator along a labelling of its
/// states: pi_i = pi(. | block i), in-block conductances c / pi(block i).
/// Throws IrreducibilityError when a block is disconnected.
GeneratorMixture condition_on_blocks(const ReversibleGenerator& parent,
                                     const std::vector<std::size_t>& block_of);

struct BuiltModel {
  std::string kind;
  GeneratorMixture gm;
  std::vector<std::string> warnings;
  std::optional<Grid1D> grid;
};

/// Parses and validates a ModelSpec object (unknown fields rejected) and
/// dispatches to the builder named by "kind". `seed` is used by random kinds
/// when the spec has none.
BuiltModel build_model(const io::Json& spec, std::uint64_t seed = 1,
                       const std::string& path = "model");

}  // namespace mixlab
