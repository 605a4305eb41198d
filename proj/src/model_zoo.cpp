#include "mixlab/model_zoo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>

#include "mixlab/error.hpp"
#include "mixlab/rng.hpp"
#include "mixlab/schema.hpp"

namespace mixlab {

namespace {

double log_add(double a, double b) {
  const double mx = std::max(a, b);
  return mx + std::log1p(std::exp(std::min(a, b) - mx));
}

SpacePtr index_line(std::size_t n) {
  std::vector<double> c(n);
  std::iota(c.begin(), c.end(), 0.0);
  return StateSpace::line(std::move(c));
}

Grid1D read_grid(io::ObjectReader r) {
  Grid1D g;
  g.lo = r.real("lo");
  g.hi = r.real("hi");
  g.n = r.count("n", 801);
  r.finish();
  try {
    g.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(r.path("") + " " + e.what());
  }
  return g;
}

}  // namespace

GeneratorMixture build_two_point(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw ConfigError("two_point: rates must be positive and finite");
  auto space = index_line(2);
  FiniteMeasure pi(space, {b / (a + b), a / (a + b)});
  auto gen = ReversibleGenerator::from_conductances(pi, {{0, 1, a * b / (a + b)}});
  MixtureModel mix({pi}, FiniteMeasure::on_indices({1.0}));
  return GeneratorMixture(std::move(mix), {gen}, gen);
}

GeneratorMixture build_block_mixture(const BlockParams& p) {
  const std::size_t k = p.rates.size();
  if (k == 0) throw ConfigError("block_mixture: at least one block is required");
  std::vector<double> w = p.weights;
  if (w.empty()) w.assign(k, 1.0 / static_cast<double>(k));
  if (w.size() != k) throw ConfigError("block_mixture: one weight per block is required");
  for (double x : w)
    if (!(x > 0.0)) throw ConfigError("block_mixture: weights must be positive");
  if (!(p.cut >= 0.0) || !std::isfinite(p.cut))
    throw ConfigError("block_mixture: cut conductance must be nonnegative");

  auto space = index_line(2 * k);
  std::vector<FiniteMeasure> pis;
  std::vector<ReversibleGenerator> comps;
  std::vector<double> conductance(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double a = p.rates[i][0], b = p.rates[i][1];
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
      throw ConfigError("block_mixture: rates of block " + std::to_string(i) +
                        " must be positive");
    std::vector<double> m(2 * k, 0.0);
    m[2 * i] = b / (a + b);
    m[2 * i + 1] = a / (a + b);
    pis.emplace_back(space, m);
    conductance[i] = a * b / (a + b);
    comps.push_back(ReversibleGenerator::from_conductances(pis.back(),
                                                           {{2 * i, 2 * i + 1, conductance[i]}}));
  }
  MixtureModel mix(std::move(pis), FiniteMeasure::on_indices(w));
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < k; ++i) {
    edges.push_back({2 * i, 2 * i + 1, mix.weights()[i] * conductance[i]});
    if (p.cut > 0.0 && i + 1 < k) edges.push_back({2 * i + 1, 2 * i + 2, p.cut});
  }
  auto parent = ReversibleGenerator::from_conductances(mix.parent(), std::move(edges));
  return GeneratorMixture(std::move(mix), std::move(comps), std::move(parent));
}

GeneratorMixture condition_on_blocks(const ReversibleGenerator& parent,
                                     const std::vector<std::size_t>& block_of) {
  const std::size_t n = parent.size();
  if (block_of.size() != n) throw DimensionError("one block label per state is required");
  const std::size_t m = *std::max_element(block_of.begin(), block_of.end()) + 1;
  const auto& pi = parent.stationary();
  std::vector<double> mass(m, 0.0);
  for (std::size_t x = 0; x < n; ++x) mass[block_of[x]] += pi[x];
  for (std::size_t i = 0; i < m; ++i)
    if (!(mass[i] > 0.0))
      throw ConfigError("block " + std::to_string(i) + " carries no stationary mass");

  std::vector<FiniteMeasure> pis;
  std::vector<std::vector<Edge>> edges(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> v(n, 0.0);
    for (std::size_t x = 0; x < n; ++x)
      if (block_of[x] == i) v[x] = pi[x] / mass[i];
    pis.emplace_back(parent.space_ptr(), std::move(v));
  }
  for (const auto& e : parent.edges())
    if (block_of[e.x] == block_of[e.y])
      edges[block_of[e.x]].push_back({e.x, e.y, e.c / mass[block_of[e.x]]});

  std::vector<ReversibleGenerator> comps;
  for (std::size_t i = 0; i < m; ++i) {
    comps.push_back(ReversibleGenerator::from_conductances(pis[i], std::move(edges[i])));
    if (!comps.back().irreducible())
      throw IrreducibilityError("block " + std::to_string(i) +
                                " is not connected under in-block moves");
  }
  MixtureModel mix(std::move(pis), FiniteMeasure::on_indices(mass));
  auto rebuilt = ReversibleGenerator::from_conductances(mix.parent(), parent.edges());
  return GeneratorMixture(std::move(mix), std::move(comps), std::move(rebuilt));
}

std::vector<double> double_well_potential(const DoubleWellParams& p) {
  std::vector<double> v(p.grid.n);
  for (std::size_t k = 0; k < p.grid.n; ++k) {
    const double x = p.grid.point(k);
    v[k] = p.depth * (x * x - 1.0) * (x * x - 1.0);
  }
  return v;
}

GeneratorMixture build_double_well(const DoubleWellParams& p, std::vector<std::string>* warnings) {
  p.grid.validate();
  if (!(p.depth >= 0.0) || !std::isfinite(p.depth))
    throw ConfigError("double_well: depth must be nonnegative");
  if (!(p.split > p.grid.lo && p.split < p.grid.hi))
    throw ConfigError("double_well: split must lie inside the grid");
  auto d = discretize_potential(double_well_potential(p), p.grid);
  if (!d.certified && warnings) warnings->push_back("double_well: " + d.warning);
  std::vector<std::size_t> block(p.grid.n);
  const double tol = 1e-9 * p.grid.h();
  for (std::size_t k = 0; k < p.grid.n; ++k) block[k] = p.grid.point(k) < p.split - tol ? 0 : 1;
  return condition_on_blocks(d.generator, block);
}

GeneratorMixture build_gaussian_mixture_grid(const GaussianMixture1D& g,
                                             std::optional<Grid1D> grid) {
  g.validate();
  const Grid1D gr = grid ? *grid : Grid1D::around(g);
  double leak = 0.0;
  auto gm = discretize_mixture(g, gr, &leak);
  if (leak > 1e-10)
    throw ConfigError("gaussian_mixture_grid: grid leaks " + io::format_double(leak) +
                      " of the mass (limit 1e-10)");
  return gm;
}

double ising_magnetization(std::size_t state, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += (state >> k) & 1U ? 1.0 : -1.0;
  return s;
}

GeneratorMixture build_ising_glauber(const IsingParams& p) {
  if (p.n < 1 || p.n > 12) throw ConfigError("ising_glauber: n must be in [1, 12]");
  if (!std::isfinite(p.beta) || !std::isfinite(p.h_field))
    throw ConfigError("ising_glauber: beta and h_field must be finite");
  if (p.interaction != "curie_weiss" && p.interaction != "ring")
    throw ConfigError("ising_glauber: interaction must be curie_weiss or ring");
  const std::size_t n = p.n, N = std::size_t{1} << n;
  auto spin = [](std::size_t s, std::size_t k) { return (s >> k) & 1U ? 1.0 : -1.0; };

  std::vector<double> logw(N);
  for (std::size_t s = 0; s < N; ++s) {
    double pair = 0.0;
    if (p.interaction == "curie_weiss") {
      const double M = ising_magnetization(s, n);
      pair = (M * M - static_cast<double>(n)) / (2.0 * static_cast<double>(n));
    } else if (n > 1) {
      const std::size_t bonds = n == 2 ? 1 : n;
      for (std::size_t k = 0; k < bonds; ++k) pair += spin(s, k) * spin(s, (k + 1) % n);
    }
    logw[s] = p.beta * (pair + p.h_field * ising_magnetization(s, n));
  }
  const double mx = *std::max_element(logw.begin(), logw.end());
  double z = 0.0;
  for (double l : logw) z += std::exp(l - mx);
  const double lz = mx + std::log(z);
  std::vector<double> pi(N);
  for (std::size_t s = 0; s < N; ++s) pi[s] = std::exp(logw[s] - lz);

  StateSpace::Options opt;
  for (std::size_t s = 0; s < N; ++s) {
    std::string label(n, '-');
    for (std::size_t k = 0; k < n; ++k)
      if ((s >> k) & 1U) label[k] = '+';
    opt.labels.push_back(std::move(label));
  }
  if (n <= 8) {
    opt.metric.resize(N * N);
    for (std::size_t s = 0; s < N; ++s)
      for (std::size_t t = 0; t < N; ++t)
        opt.metric[s * N + t] = static_cast<double>(std::popcount(s ^ t));
  }
  auto space = StateSpace::make(N, std::move(opt));

  std::vector<Edge> edges;
  for (std::size_t s = 0; s < N; ++s)
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t t = s ^ (std::size_t{1} << k);
      if (t < s) continue;
      const double lc = logw[s] + logw[t] - log_add(logw[s], logw[t]) - lz;
      edges.push_back({s, t, std::exp(lc)});
    }
  auto parent = ReversibleGenerator::from_conductances(FiniteMeasure(space, std::move(pi)),
                                                       std::move(edges));

  std::vector<std::size_t> block(N, 0);
  if (p.partition == "magnetization_sign") {
    for (std::size_t s = 0; s < N; ++s) {
      const double M = ising_magnetization(s, n);
      block[s] = (M > 0.0 || (M == 0.0 && (s & 1U))) ? 0 : 1;
    }
  } else if (p.partition == "explicit") {
    if (p.blocks.size() != N)
      throw ConfigError("ising_glauber: explicit partition needs one label per state (" +
                        std::to_string(N) + ")");
    block = p.blocks;
  } else if (p.partition != "single") {
    throw ConfigError("ising_glauber: partition must be magnetization_sign, single or explicit");
  }
  return condition_on_blocks(parent, block);
}

GeneratorMixture build_random_dominated(const RandomDominatedParams& p) {
  if (p.n < 2 || p.n > 200) throw ConfigError("random_dominated: n must be in [2, 200]");
  if (p.m < 1 || p.m > 6) throw ConfigError("random_dominated: m must be in [1, 6]");
  if (!(p.slack >= 0.0) || !(p.edge_probability >= 0.0 && p.edge_probability <= 1.0) ||
      !(p.holes >= 0.0 && p.holes < 1.0))
    throw ConfigError("random_dominated: slack >= 0, edge_probability and holes in [0, 1)");

  CounterRng rng(p.seed);
  const std::size_t n = p.n, m = p.m;
  std::vector<std::vector<std::size_t>> support(m);
  std::vector<bool> covered(n, false);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<bool> in(n, false);
    for (std::size_t x = 0; x < n; ++x) in[x] = rng.uniform() >= p.holes;
    while (std::count(in.begin(), in.end(), true) < 2) in[rng.below(n)] = true;
    for (std::size_t x = 0; x < n; ++x)
      if (in[x]) {
        support[i].push_back(x);
        covered[x] = true;
      }
  }
  for (std::size_t x = 0; x < n; ++x)
    if (!covered[x]) {
      auto& s = support[rng.below(m)];
      s.insert(std::upper_bound(s.begin(), s.end(), x), x);
    }

  auto space = index_line(n);
  std::vector<FiniteMeasure> pis;
  std::vector<std::vector<Edge>> comp_edges(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> v(n, 0.0);
    for (std::size_t x : support[i]) v[x] = 0.05 + rng.exponential();
    pis.emplace_back(space, std::move(v));

    auto order = support[i];
    for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
    std::map<std::pair<std::size_t, std::size_t>, double> c;
    for (std::size_t k = 0; k + 1 < order.size(); ++k)
      c[std::minmax(order[k], order[k + 1])] = 0.05 + rng.exponential();
    for (std::size_t a = 0; a < support[i].size(); ++a)
      for (std::size_t b = a + 1; b < support[i].size(); ++b) {
        const double u = rng.uniform();
        const double draw = 0.05 + rng.exponential();
        const auto key = std::make_pair(support[i][a], support[i][b]);
        if (u < p.edge_probability && !c.count(key)) c[key] = draw;
      }
    for (const auto& [k, v2] : c) comp_edges[i].push_back({k.first, k.second, v2});
  }
  std::vector<double> w(m);
  for (auto& x : w) x = 0.1 + rng.exponential();
  const double ws = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= ws;

  MixtureModel mix(std::move(pis), FiniteMeasure::on_indices(w));
  std::vector<ReversibleGenerator> comps;
  std::map<std::pair<std::size_t, std::size_t>, double> parent_c;
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& e : comp_edges[i]) parent_c[{e.x, e.y}] += mix.weights()[i] * e.c;
    comps.push_back(ReversibleGenerator::from_conductances(mix.component(i),
                                                           std::move(comp_edges[i])));
  }
  for (std::size_t x = 0; x + 1 < n; ++x) {
    const double s = p.slack * rng.exponential();
    if (s > 0.0) parent_c[{x, x + 1}] += s;
  }
  std::vector<Edge> edges;
  for (const auto& [k, v] : parent_c) edges.push_back({k.first, k.second, v});
  auto parent = ReversibleGenerator::from_conductances(mix.parent(), std::move(edges));
  return GeneratorMixture(std::move(mix), std::move(comps), std::move(parent));
}

BuiltModel build_model(const io::Json& spec, std::uint64_t seed, const std::string& path) {
  io::ObjectReader r(spec, path);
  const std::string kind = r.text("kind");
  BuiltModel out{kind, build_two_point(1.0, 1.0), {}, {}};

  if (kind == "two_point") {
    const double a = r.positive("a", 1.0), b = r.positive("b", 1.0);
    r.finish();
    out.gm = build_two_point(a, b);
  } else if (kind == "block_mixture") {
    BlockParams p;
    if (r.has("rates")) {
      const auto& rates = r.raw("rates");
      if (!rates.is_array() || rates.empty())
        throw ConfigError(r.path("rates") + ": expected a non-empty array of [a, b] pairs");
      p.rates.clear();
      for (std::size_t i = 0; i < rates.size(); ++i) {
        const std::string where = r.path("rates") + "[" + std::to_string(i) + "]";
        if (!rates[i].is_array() || rates[i].size() != 2 || !rates[i][0].is_number() ||
            !rates[i][1].is_number())
          throw ConfigError(where + ": expected [a, b]");
        const double a = rates[i][0].get<double>(), b = rates[i][1].get<double>();
        if (!(a > 0.0) || !(b > 0.0)) throw ConfigError(where + ": rates must be positive");
        p.rates.push_back({a, b});
      }
    }
    if (r.has("weights")) {
      p.weights = r.probability("weights");
      for (std::size_t i = 0; i < p.weights.size(); ++i)
        if (!(p.weights[i] > 0.0))
          throw ConfigError(r.path("weights") + "[" + std::to_string(i) + "]: must be positive");
      if (p.weights.size() != p.rates.size())
        throw ConfigError(r.path("weights") + ": one weight per block is required");
    }
    p.cut = r.nonnegative("cut", 0.0);
    r.finish();
    out.gm = build_block_mixture(p);
  } else if (kind == "double_well") {
    DoubleWellParams p;
    p.depth = r.nonnegative("depth", 3.0);
    if (r.has("grid")) p.grid = read_grid(r.object("grid"));
    p.split = r.real("split", 0.0);
    r.finish();
    out.gm = build_double_well(p, &out.warnings);
    out.grid = p.grid;
  } else if (kind == "gaussian_mixture_grid") {
    GaussianMixture1D g;
    g.means = r.reals("means");
    g.weights = r.probability("weights");
    for (std::size_t i = 0; i < g.weights.size(); ++i)
      if (!(g.weights[i] > 0.0))
        throw ConfigError(r.path("weights") + "[" + std::to_string(i) + "]: must be positive");
    g.variances = r.reals("variances", {});
    for (std::size_t i = 0; i < g.variances.size(); ++i)
      if (!(g.variances[i] > 0.0))
        throw ConfigError(r.path("variances") + "[" + std::to_string(i) + "]: must be positive");
    std::optional<Grid1D> grid;
    if (r.has("grid")) grid = read_grid(r.object("grid"));
    r.finish();
    g.validate();
    out.grid = grid ? *grid : Grid1D::around(g);
    out.gm = build_gaussian_mixture_grid(g, out.grid);
  } else if (kind == "ising_glauber") {
    IsingParams p;
    p.n = r.count("n");
    p.beta = r.real("beta", 0.0);
    p.h_field = r.real("h_field", 0.0);
    p.interaction = r.text("interaction", std::string("curie_weiss"));
    if (r.has("partition") && r.raw("partition").is_array()) {
      p.partition = "explicit";
      for (const auto& v : r.raw("partition")) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
          throw ConfigError(r.path("partition") + ": labels must be nonnegative integers");
        p.blocks.push_back(v.get<std::size_t>());
      }
    } else {
      p.partition = r.text("partition", std::string("magnetization_sign"));
    }
    r.finish();
    out.gm = build_ising_glauber(p);
  } else if (kind == "random_dominated") {
    RandomDominatedParams p;
    p.n = r.count("n", 12);
    p.m = r.count("m", 3);
    p.slack = r.nonnegative("slack", 0.1);
    p.edge_probability = r.nonnegative("edge_probability", 0.2);
    p.holes = r.nonnegative("holes", 0.3);
    p.seed = r.count("seed", seed);
    r.finish();
    out.gm = build_random_dominated(p);
  } else {
    throw ConfigError(r.path("kind") + ": unknown model kind '" + kind + "'");
  }
  return out;
}

}  // namespace mixlab
