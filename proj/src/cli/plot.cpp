#include "dsm/cli/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dsm/error.hpp"

namespace dsm::cli {

int count_runs(const std::vector<double>& flags) {
  int runs = 0;
  bool prev = false;
  for (double f : flags) {
    const bool on = f != 0.0;
    if (on && !prev) ++runs;
    prev = on;
  }
  return runs;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

const char* kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string render_svg(const Table& table, const PlotSpec& spec) {
  if (table.rows.empty()) throw ConfigError("plot: the table has no rows");
  if (spec.y.empty()) throw ConfigError("plot: no y column requested");
  auto col = [&](const std::string& name) {
    const int c = table.column(name);
    if (c < 0) throw ConfigError("plot: unknown column '" + name + "'");
    return c;
  };
  const int cx = col(spec.x);
  std::vector<int> cy;
  for (const auto& y : spec.y) cy.push_back(col(y));
  const int cj = spec.shade.empty() ? -1 : table.column(spec.shade);

  double x0 = table.rows.front()[cx], x1 = x0, y0 = table.rows.front()[cy[0]], y1 = y0;
  for (const auto& r : table.rows) {
    x0 = std::min(x0, r[cx]);
    x1 = std::max(x1, r[cx]);
    for (int c : cy) {
      y0 = std::min(y0, r[c]);
      y1 = std::max(y1, r[c]);
    }
  }
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double left = 60, right = 20, top = 30, bottom = 40;
  const double w = spec.width - left - right, h = spec.height - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * w; };
  auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * h; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(spec.width) + "\" height=\"" + std::to_string(spec.height) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(spec.width) + "\" height=\"" +
         std::to_string(spec.height) + "\" fill=\"white\"/>\n";
  if (cj >= 0) {
    const std::size_t n = table.rows.size();
    std::size_t i = 0;
    while (i < n) {
      if (table.rows[i][cj] == 0.0) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 < n && table.rows[j + 1][cj] != 0.0) ++j;
      const double a = px(table.rows[i][cx]);
      const double b = px(table.rows[std::min(j + 1, n - 1)][cx]);
      svg += "<rect class=\"jump-band\" x=\"" + num(a) + "\" y=\"" + num(top) + "\" width=\"" +
             num(std::max(b - a, 1.0)) + "\" height=\"" + num(h) + "\" fill=\"#cccccc\"/>\n";
      i = j + 1;
    }
  }
  svg += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(w) +
         "\" height=\"" + num(h) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (std::size_t s = 0; s < cy.size(); ++s) {
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(kColours[s % 6]) +
           "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < table.rows.size(); ++i)
      svg += (i ? " " : "") + num(px(table.rows[i][cx])) + "," + num(py(table.rows[i][cy[s]]));
    svg += "\"/>\n";
    svg += "<text x=\"" + num(left + 10 + 120 * s) + "\" y=\"" + num(top - 10) +
           "\" font-size=\"12\" fill=\"" + kColours[s % 6] + "\">" + escape(spec.y[s]) +
           "</text>\n";
  }
  svg += "<text x=\"" + num(left) + "\" y=\"" + num(spec.height - 10) + "\" font-size=\"11\">" +
         escape(spec.x) + " " + num(x0) + " .. " + num(x1) + "</text>\n";
  svg += "<text x=\"5\" y=\"" + num(top + 10) + "\" font-size=\"11\">" + num(y1) + "</text>\n";
  svg += "<text x=\"5\" y=\"" + num(top + h) + "\" font-size=\"11\">" + num(y0) + "</text>\n";
  if (!spec.title.empty())
    svg += "<title>" + escape(spec.title) + "</title>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace dsm::cli
