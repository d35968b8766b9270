#pragma once

#include <string>
#include <vector>

#include "dsm/cli/csv.hpp"

namespace dsm::cli {

struct PlotSpec {
  std::string x = "t";
  std::vector<std::string> y{"alpha_hat"};
  std::string shade = "J";  // empty disables the activation bands
  std::string title;
  int width = 800;
  int height = 400;
};

// SVG 1.1 line chart; throws ConfigError on unknown columns or an empty table.
std::string render_svg(const Table& table, const PlotSpec& spec);

int count_runs(const std::vector<double>& flags);

}  // namespace dsm::cli
