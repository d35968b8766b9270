#pragma once

#include <string>
#include <vector>

namespace dsm::cli {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

// Comma separated, full-precision numbers, '\n' line ends.
std::string format_table(const Table& table);
void write_text(const std::string& path, const std::string& text);
void write_table(const std::string& path, const Table& table);
std::string read_text(const std::string& path);  // throws MissingArtifact
Table read_table(const std::string& path);

}  // namespace dsm::cli
