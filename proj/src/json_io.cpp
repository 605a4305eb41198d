#include "mixlab/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "mixlab/error.hpp"

namespace mixlab::io {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void dump_into(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += Json(k).dump();
        out += ':';
        dump_into(v, out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        dump_into(j[i], out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isfinite(v))
        out += format_double(v);
      else
        out += '"' + format_double(v) + '"';
      break;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump(const Json& j) {
  std::string out;
  dump_into(j, out);
  return out;
}

double number(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ConfigError("expected a number, got " + j.dump());
}

Json to_json(const InequalityReport& r) {
  Json constants = Json::array();
  for (const auto& c : r.constants_used)
    constants.push_back({{"name", c.name},
                         {"value", c.value},
                         {"provenance", to_string(c.provenance)}});
  Json j{{"name", r.name},
         {"lhs", r.lhs},
         {"rhs", r.rhs},
         {"margin", r.margin},
         {"pass", r.pass},
         {"status", r.status()},
         {"kind", to_string(r.kind)},
         {"inputs_digest", r.inputs_digest},
         {"constants_used", constants}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

Json to_json(const FiniteMeasure& m) { return Json(m.values()); }

Json to_json(const ReversibleGenerator& g) {
  Json edges = Json::array();
  for (const auto& e : g.edges()) edges.push_back({e.x, e.y, e.c});
  return {{"stationary", to_json(g.stationary())}, {"edges", edges}};
}

Json to_json(const GeneratorMixture& gm) {
  Json comps = Json::array();
  for (const auto& c : gm.components) comps.push_back(to_json(c));
  Json space{{"size", gm.parent.size()}};
  const auto& sp = gm.parent.space();
  if (sp.has_coords())
    space["coords"] = std::vector<double>(sp.coords().begin(), sp.coords().end());
  if (sp.has_labels()) space["labels"] = sp.labels();
  if (sp.has_metric() && !sp.has_coords())
    space["metric"] =
        std::vector<double>(sp.metric_matrix().begin(), sp.metric_matrix().end());
  return {{"space", space},
          {"weights", to_json(gm.mix.weights())},
          {"components", comps},
          {"parent", to_json(gm.parent)}};
}

FiniteMeasure measure_from_json(const Json& j, const SpacePtr& space) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(number(x));
  return FiniteMeasure(space, std::move(v));
}

ReversibleGenerator generator_from_json(const Json& j, const SpacePtr& space) {
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges"))
    edges.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(),
                     number(e.at(2))});
  return ReversibleGenerator::from_conductances(
      measure_from_json(j.at("stationary"), space), std::move(edges));
}

GeneratorMixture mixture_from_json(const Json& j) {
  const auto& sj = j.at("space");
  StateSpace::Options opt;
  if (sj.contains("coords")) {
    for (const auto& c : sj["coords"]) opt.coords.push_back(number(c));
    const std::size_t n = opt.coords.size();
    opt.metric.resize(n * n);
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        opt.metric[x * n + y] = std::abs(opt.coords[x] - opt.coords[y]);
  }
  if (sj.contains("labels")) opt.labels = sj["labels"].get<std::vector<std::string>>();
  if (sj.contains("metric"))
    for (const auto& c : sj["metric"]) opt.metric.push_back(number(c));
  auto space = StateSpace::make(sj.at("size").get<std::size_t>(), std::move(opt));

  std::vector<ReversibleGenerator> comps;
  std::vector<FiniteMeasure> measures;
  for (const auto& c : j.at("components")) {
    comps.push_back(generator_from_json(c, space));
    measures.push_back(comps.back().stationary());
  }
  std::vector<double> w;
  for (const auto& x : j.at("weights")) w.push_back(number(x));
  auto parent = generator_from_json(j.at("parent"), space);
  MixtureModel mix(std::move(measures), FiniteMeasure::on_indices(std::move(w)),
                   parent.stationary());
  return GeneratorMixture(std::move(mix), std::move(comps), std::move(parent));
}

void write_json_lines(const std::string& path, const Stamp& stamp,
                      const std::vector<Json>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << dump(Json{{"config_digest", stamp.config_digest}, {"seed", stamp.seed}})
      << '\n';
  for (const auto& l : lines) out << dump(l) << '\n';
}

void write_reports(const std::string& jsonl_path, const std::string& csv_path,
                   const Stamp& stamp, const std::vector<InequalityReport>& reports) {
  std::vector<Json> lines;
  for (const auto& r : reports) lines.push_back(to_json(r));
  write_json_lines(jsonl_path, stamp, lines);
  CsvWriter csv(csv_path, stamp, {"name", "lhs", "rhs", "margin", "pass"});
  for (const auto& r : reports)
    csv.row_text({r.name, format_double(r.lhs), format_double(r.rhs),
                  format_double(r.margin), r.pass ? "true" : "false"});
}

CsvWriter::CsvWriter(const std::string& path, const Stamp& stamp,
                     const std::vector<std::string>& columns)
    : out_(path, std::ios::binary), width_(columns.size()) {
  if (!out_) throw ConfigError("cannot write " + path);
  out_ << "# config_digest=" << stamp.config_digest << " seed=" << stamp.seed << '\n';
  row_text(columns);
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  for (double v : values) cells.push_back(format_double(v));
  row_text(cells);
}

void CsvWriter::row_text(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw DimensionError("csv row has the wrong width");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

}  // namespace mixlab::io
