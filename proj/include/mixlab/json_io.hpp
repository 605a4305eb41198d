#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mixlab/dirichlet.hpp"
#include "mixlab/report.hpp"

namespace mixlab::io {

// nlohmann's default object type is an ordered std::map, so keys serialize
// sorted.
using Json = nlohmann::json;

std::string format_double(double v);  // %.17g; "inf", "-inf", "nan"
// Compact dump with 17-significant-digit numbers; non-finite numbers become
// the strings "inf", "-inf", "nan".
std::string dump(const Json& j);
double number(const Json& j);  // accepts the strings written by dump

Json to_json(const InequalityReport& r);
Json to_json(const FiniteMeasure& m);
Json to_json(const ReversibleGenerator& g);
Json to_json(const GeneratorMixture& gm);

FiniteMeasure measure_from_json(const Json& j, const SpacePtr& space);
ReversibleGenerator generator_from_json(const Json& j, const SpacePtr& space);
GeneratorMixture mixture_from_json(const Json& j);

// Provenance stamp embedded in every output file.
struct Stamp {
  std::string config_digest;
  std::uint64_t seed = 0;
};

// One JSON object per line, the first line holding the stamp.
void write_json_lines(const std::string& path, const Stamp& stamp,
                      const std::vector<Json>& lines);
void write_reports(const std::string& jsonl_path, const std::string& csv_path,
                   const Stamp& stamp, const std::vector<InequalityReport>& reports);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const Stamp& stamp,
            const std::vector<std::string>& columns);

  void row(const std::vector<double>& values);
  void row_text(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t width_;
};

}  // namespace mixlab::io
