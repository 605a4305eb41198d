#include <iostream>

#include "CLI11.hpp"
#include "mixlab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mixlab: reweighted functional inequalities for mixtures of reversible chains"};
  app.require_subcommand(1);
  mixlab::cli::Options opt;
  std::string config, out;
  std::uint64_t seed = 0;

  for (const auto& name : mixlab::cli::experiments()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "seed, overrides the config");
    sub->add_flag("--plots", opt.plots, "write static SVG plots");
    sub->add_option("--threads", opt.threads, "OpenMP threads (0 keeps the default)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mixlab::cli::kExitSchema;
  }

  for (auto* sub : app.get_subcommands()) {
    opt.experiment = sub->get_name();
    if (sub->count("--config")) opt.config = config;
    if (sub->count("--out")) opt.out = out;
    if (sub->count("--seed")) opt.seed = seed;
  }
  return mixlab::cli::run(opt, std::cout, std::cerr);
}
