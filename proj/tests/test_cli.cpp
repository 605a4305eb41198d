#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mixlab/cli.hpp"
#include "mixlab/continuum1d.hpp"
#include "mixlab/json_io.hpp"

using namespace mixlab;
namespace fs = std::filesystem;

namespace {

struct Sandbox {
  fs::path dir;
  explicit Sandbox(const std::string& name) : dir(fs::temp_directory_path() / name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::string& experiment, const std::string& config, const fs::path& out_dir,
        std::optional<std::uint64_t> seed = {}) {
  cli::Options o;
  o.experiment = experiment;
  if (!config.empty()) o.config = config;
  o.out = out_dir.string();
  o.seed = seed;
  o.plots = true;
  std::ostringstream out, err;
  const int code = cli::run(o, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("verify on an archived random_dominated fixture exits 0") {
  Sandbox box("mixlab_cli_verify");
  const auto cfg = box.write(
      "verify.json", std::string(R"({"model": ")") + MIXLAB_FIXTURE_DIR +
                         R"(/random_dominated_seed7.json", "measure": {"type": "random", "holes": 0.2},
                             "probes": 20, "seed": 3})");
  const auto r = run("verify", cfg, box.dir / "a");
  INFO(r.out << r.err);
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("PASS decomposition.rn_key") != std::string::npos);
  for (const char* f : {"reports.jsonl", "reports.csv", "model.jsonl", "verify.json"})
    CHECK(fs::exists(box.dir / "a" / f));
  const auto csv = slurp(box.dir / "a" / "reports.csv");
  CHECK(csv.rfind("# config_digest=", 0) == 0);
  CHECK(csv.find(" seed=3\n") != std::string::npos);

  // Identical (config, seed) give identical bytes.
  const auto again = run("verify", cfg, box.dir / "b");
  CHECK(again.code == cli::kExitOk);
  for (const char* f : {"reports.jsonl", "reports.csv", "model.jsonl", "verify.json"})
    CHECK(slurp(box.dir / "a" / f) == slurp(box.dir / "b" / f));

  // The seed flag overrides the config and shows up in the stamp.
  const auto other = run("verify", cfg, box.dir / "c", 9);
  CHECK(other.code == cli::kExitOk);
  CHECK(slurp(box.dir / "c" / "reports.csv").find(" seed=9\n") != std::string::npos);
}

TEST_CASE("schema violations exit 64 with the field path") {
  Sandbox box("mixlab_cli_schema");
  auto r = run("verify",
               box.write("neg.json", R"({"model": {"kind": "block_mixture", "weights": [1.2, -0.2]}})"),
               box.dir / "o");
  CHECK(r.code == cli::kExitSchema);
  CHECK(r.err.find("config.model.weights[1]") != std::string::npos);

  r = run("balcheerd", box.write("unk.json", R"({"m": 4, "colour": "red"})"), box.dir / "o");
  CHECK(r.code == cli::kExitSchema);
  CHECK(r.err.find("config.colour: unknown field") != std::string::npos);

  r = run("evolve", box.write("mis.json", R"({"experiment": "verify"})"), box.dir / "o");
  CHECK(r.code == cli::kExitSchema);

  r = run("evolve", box.write("bad.json", "{not json"), box.dir / "o");
  CHECK(r.code == cli::kExitSchema);

  r = run("evolve", box.write("nomodel.json", "{}"), box.dir / "o");
  CHECK(r.code == cli::kExitSchema);
  CHECK(r.err.find("config.model: required field missing") != std::string::npos);
}

TEST_CASE("numeric failures exit 65 naming the operation") {
  Sandbox box("mixlab_cli_numeric");
  const auto r = run("balcheerd",
                     box.write("narrow.json", R"({"m": 4, "grid": {"lo": -3, "hi": 3, "n": 101}})"),
                     box.dir / "o");
  CHECK(r.code == cli::kExitNumeric);
  CHECK(r.err.find("balcheerd_report") != std::string::npos);
}

TEST_CASE("balcheerd report carries the continuum values") {
  Sandbox box("mixlab_cli_balcheerd");
  const auto r = run("balcheerd", box.write("b.json", R"({"m": 4})"), box.dir / "o");
  INFO(r.out << r.err);
  CHECK(r.code == cli::kExitOk);
  const auto j = io::Json::parse(slurp(box.dir / "o" / "balcheerd.json"));
  const auto ref = balcheerd_report(4.0, {-12.0, 12.0, 801});
  CHECK(io::number(j["result"]["kl"]) == ref.continuum.kl);
  CHECK(io::number(j["result"]["fi"]) == ref.continuum.fi);
  CHECK(io::number(j["result"]["kl_hull"]) == ref.kl_hull);
  CHECK(io::number(j["result"]["lambda_star"][0]) == ref.lambda_star[0]);
  CHECK(fs::exists(box.dir / "o" / "densities.svg"));
  CHECK(slurp(box.dir / "o" / "densities.svg").find("config_digest=") != std::string::npos);
}

TEST_CASE("user-supplied constants that fail exit 2, estimated ones warn") {
  Sandbox box("mixlab_cli_constants");
  // A far too small C' makes the metastability bound fail.
  const std::string model = R"("model": {"kind": "block_mixture", "weights": [0.3, 0.7], "cut": 0.2},
                               "mu0": {"type": "point", "state": 0}, "horizon": 2, "steps": 41)";
  auto r = run("evolve", box.write("u.json", "{" + model + R"(, "C_prime": 1e-3})"), box.dir / "u");
  INFO(r.out << r.err);
  CHECK(r.code == cli::kExitConstantFailure);
  r = run("evolve",
          box.write("e.json", "{" + model + R"(, "C_prime": 1e-3, "provenance": "estimated"})"),
          box.dir / "e");
  CHECK(r.code == cli::kExitOk);
  CHECK(r.err.find("constant underestimate suspected") != std::string::npos);
  CHECK(fs::exists(box.dir / "e" / "trace.csv"));
  CHECK(fs::exists(box.dir / "e" / "trace.svg"));
}

TEST_CASE("remaining subcommands run on small models") {
  Sandbox box("mixlab_cli_misc");
  auto r = run("transport",
               box.write("t.json", R"({"model": {"kind": "double_well", "grid": {"lo": -2, "hi": 2, "n": 21}},
                                       "cost": "squared_metric"})"),
               box.dir / "t");
  INFO(r.out << r.err);
  CHECK(r.code == cli::kExitOk);
  CHECK(fs::exists(box.dir / "t" / "coupling_hull.csv"));

  r = run("constants", box.write("c.json", R"({"model": {"kind": "two_point", "a": 1, "b": 3}, "starts": 8})"),
          box.dir / "c");
  CHECK(r.code == cli::kExitOk);
  const auto j = io::Json::parse(slurp(box.dir / "c" / "constants.json"));
  CHECK(std::abs(io::number(j["result"]["parent"]["spectral_gap"]) - 4.0) < 1e-12);

  r = run("concentration",
          box.write("k.json", R"({"model": {"kind": "double_well", "grid": {"lo": -2, "hi": 2, "n": 21}},
                                  "horizon": 5, "count": 400, "probes": 20})"),
          box.dir / "k");
  CHECK(r.code == cli::kExitOk);
  CHECK(fs::exists(box.dir / "k" / "tail.svg"));

  r = run("sweep", box.write("s.json", R"({"ms": [0, 2], "grid": {"lo": -12, "hi": 12, "n": 201}})"),
          box.dir / "s");
  CHECK(r.code == cli::kExitOk);
  CHECK(slurp(box.dir / "s" / "sweep.csv").find("m,kl,fi,lambda1,lambda2,kl_hull,w2sq_hull") !=
        std::string::npos);
}
