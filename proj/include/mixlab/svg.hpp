#pragma once

#include <string>
#include <vector>

#include "mixlab/json_io.hpp"

namespace mixlab::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Static line plot. Non-finite points break the polyline. Numbers are
/// printed with fixed precision so equal inputs give equal files.
void line_plot(const std::string& path, const io::Stamp& stamp, const std::string& title,
               const std::string& x_label, const std::vector<Series>& series);

}  // namespace mixlab::svg
