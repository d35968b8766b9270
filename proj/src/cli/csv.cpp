#include "dsm/cli/csv.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dsm/cli/scenario.hpp"
#include "dsm/error.hpp"

namespace dsm::cli {

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

std::string format_table(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_double(row[i]);
    out += "\n";
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

void write_table(const std::string& path, const Table& table) {
  write_text(path, format_table(table));
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("missing file '" + path + "'");
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Table read_table(const std::string& path) {
  const std::string text = read_text(path);
  std::istringstream in(text);
  Table t;
  std::string line;
  if (!std::getline(in, line)) return t;
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) t.header.push_back(cell);
  }
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream r(line);
    std::string cell;
    while (std::getline(r, cell, ',')) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || p != cell.data() + cell.size())
        throw ConfigError(path + ":" + std::to_string(line_no) + ": not a number '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != t.header.size())
      throw ConfigError(path + ":" + std::to_string(line_no) + ": wrong number of columns");
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace dsm::cli
