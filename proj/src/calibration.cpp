#include "dsm/calibration.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "dsm/dynamics.hpp"
#include "dsm/error.hpp"

namespace dsm {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || p != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long long> parse_int(const std::string& s) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v < 0) return std::nullopt;
  return v;
}

struct TimeKey {
  std::string day;  // date text or day number
  int slot = 0;
};

// Either an ISO-8601 timestamp "YYYY-MM-DD[T ]HH:MM[:SS]" or a global slot index.
std::optional<TimeKey> parse_time(const std::string& text, int slot_count) {
  if (auto idx = parse_int(text)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%020lld", *idx / slot_count);
    return TimeKey{buf, static_cast<int>(*idx % slot_count)};
  }
  int y, mo, d, h, mi;
  char sep;
  if (text.size() < 16 || std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d", &y, &mo, &d, &sep,
                                      &h, &mi) != 6)
    return std::nullopt;
  if ((sep != 'T' && sep != ' ') || mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 ||
      mi < 0 || mi > 59)
    return std::nullopt;
  const int minutes = h * 60 + mi;
  const int width = 1440 / slot_count;
  if (1440 % slot_count != 0 || minutes % width != 0) return std::nullopt;
  return TimeKey{text.substr(0, 10), minutes / width};
}

}  // namespace

ConsumptionPanel ingest_csv(const std::string& path, const FormatSpec& format,
                            IngestReport* report) {
  if (format.slot_count <= 0) throw ConfigError("format: slot_count must be positive");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ingest_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line).empty())
    throw std::runtime_error("ingest_csv: empty file " + path);
  const auto header = split(line, format.separator);
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (trim(header[i]) == name) return i;
    throw std::runtime_error("ingest_csv: missing column '" + name + "' in " + path);
  };
  const std::size_t c_meter = column(format.meter_column);
  const std::size_t c_time = column(format.time_column);
  const std::size_t c_value = column(format.value_column);

  IngestReport rep;
  std::map<std::string, std::map<std::string, std::vector<std::optional<double>>>> by_day;
  std::map<std::string, int> meters;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++rep.rows_read;
    const auto cells = split(line, format.separator);
    std::optional<TimeKey> when;
    std::optional<double> value;
    if (cells.size() == header.size()) {
      when = parse_time(trim(cells[c_time]), format.slot_count);
      value = parse_double(trim(cells[c_value]));
    }
    const std::string meter = cells.size() == header.size() ? trim(cells[c_meter]) : "";
    if (!when || !value || meter.empty()) {
      ++rep.rows_malformed;
      rep.malformed_lines.push_back(line_no);
      continue;
    }
    meters.emplace(meter, 0);
    auto& row = by_day[when->day][meter];
    if (row.empty()) row.resize(format.slot_count);
    row[when->slot] = *value;
  }
  if (rep.rows_read == 0) throw std::runtime_error("ingest_csv: no data rows in " + path);
  if (static_cast<double>(rep.rows_malformed) > format.max_bad_fraction * rep.rows_read) {
    std::string lines;
    for (std::size_t i = 0; i < rep.malformed_lines.size() && i < 20; ++i)
      lines += (i ? ", " : "") + std::to_string(rep.malformed_lines[i]);
    throw std::runtime_error("ingest_csv: " + std::to_string(rep.rows_malformed) + " of " +
                             std::to_string(rep.rows_read) +
                             " rows malformed (lines " + lines + ")");
  }

  ConsumptionPanel panel;
  panel.slot_count = format.slot_count;
  int idx = 0;
  for (auto& [id, pos] : meters) {
    pos = idx++;
    panel.meter_ids.push_back(id);
  }
  panel.meter_count = idx;
  std::vector<const std::map<std::string, std::vector<std::optional<double>>>*> complete;
  for (const auto& [day, rows] : by_day) {
    bool ok = rows.size() == meters.size();
    for (const auto& [id, row] : rows)
      for (const auto& v : row) ok = ok && v.has_value();
    if (ok)
      complete.push_back(&rows);
    else
      ++rep.days_dropped;
  }
  if (complete.empty()) throw std::runtime_error("ingest_csv: no complete day in " + path);
  panel.day_count = static_cast<int>(complete.size());
  panel.values.resize(static_cast<std::size_t>(panel.day_count) * panel.slot_count *
                      panel.meter_count);
  for (int d = 0; d < panel.day_count; ++d)
    for (const auto& [id, row] : *complete[d])
      for (int s = 0; s < panel.slot_count; ++s) panel.at(d, s, meters.at(id)) = *row[s];
  if (report) *report = rep;
  return panel;
}

namespace {
std::vector<double> daily_average(const ConsumptionPanel& p, int day) {
  std::vector<double> out(p.slot_count, 0.0);
  for (int s = 0; s < p.slot_count; ++s) {
    double sum = 0.0;
    for (int i = 0; i < p.meter_count; ++i) sum += p.at(day, s, i);
    out[s] = sum / p.meter_count;
  }
  return out;
}

void check_panel(const ConsumptionPanel& p) {
  if (p.day_count < 1 || p.slot_count < 1 || p.meter_count < 1)
    throw std::invalid_argument("panel must have at least one day, slot and meter");
}
}  // namespace

std::vector<double> estimate_seasonality(const ConsumptionPanel& panel) {
  check_panel(panel);
  std::vector<double> season(panel.slot_count, 0.0);
  for (int d = 0; d < panel.day_count; ++d) {
    const auto avg = daily_average(panel, d);
    for (int s = 0; s < panel.slot_count; ++s) season[s] += avg[s];
  }
  for (double& v : season) v /= panel.day_count;
  return season;
}

std::vector<double> seasonality_std_errors(const ConsumptionPanel& panel) {
  const auto season = estimate_seasonality(panel);
  std::vector<double> se(panel.slot_count, 0.0);
  if (panel.day_count < 2) return se;
  for (int d = 0; d < panel.day_count; ++d) {
    const auto avg = daily_average(panel, d);
    for (int s = 0; s < panel.slot_count; ++s) se[s] += (avg[s] - season[s]) * (avg[s] - season[s]);
  }
  for (double& v : se) v = std::sqrt(v / (panel.day_count - 1) / panel.day_count);
  return se;
}

ConsumptionPanel remove_seasonality(const ConsumptionPanel& panel,
                                    const std::vector<double>& seasonality) {
  if (static_cast<int>(seasonality.size()) != panel.slot_count)
    throw std::invalid_argument("seasonality length differs from the slot count");
  ConsumptionPanel out = panel;
  for (int d = 0; d < panel.day_count; ++d)
    for (int s = 0; s < panel.slot_count; ++s)
      for (int i = 0; i < panel.meter_count; ++i) out.at(d, s, i) -= seasonality[s];
  return out;
}

VolatilityEstimate estimate_volatilities(const ConsumptionPanel& panel,
                                         const std::vector<double>& seasonality, double dt) {
  check_panel(panel);
  if (!(dt > 0.0)) throw std::invalid_argument("estimate_volatilities: dt must be positive");
  if (static_cast<int>(seasonality.size()) != panel.slot_count)
    throw std::invalid_argument("seasonality length differs from the slot count");
  const int S = panel.slot_count, D = panel.day_count, N = panel.meter_count;
  if (S < 2 || D < 2)
    throw std::invalid_argument("estimate_volatilities: need at least 2 slots and 2 days");
  for (double v : seasonality)
    if (!(v > 0.0)) throw std::invalid_argument("seasonality must be positive for relative increments");

  // Relative increments of the deseasonalised readings, indexed (day, step, meter).
  const int steps = S - 1;
  std::vector<double> inc(static_cast<std::size_t>(D) * steps * N);
  auto at = [&](int d, int s, int i) -> double& {
    return inc[(static_cast<std::size_t>(d) * steps + s) * N + i];
  };
  for (int d = 0; d < D; ++d)
    for (int s = 0; s < steps; ++s)
      for (int i = 0; i < N; ++i) {
        const double a = panel.at(d, s, i) / seasonality[s];
        const double b = panel.at(d, s + 1, i) / seasonality[s + 1];
        if (!(a > 0.0)) throw std::invalid_argument("readings must be positive");
        at(d, s, i) = b / a - 1.0;
      }
  // Per-step drift removal.
  for (int s = 0; s < steps; ++s) {
    double sum = 0.0;
    for (int d = 0; d < D; ++d)
      for (int i = 0; i < N; ++i) sum += at(d, s, i);
    const double mean = sum / (static_cast<double>(D) * N);
    for (int d = 0; d < D; ++d)
      for (int i = 0; i < N; ++i) at(d, s, i) -= mean;
  }
  double between = 0.0, within = 0.0;
  for (int d = 0; d < D; ++d)
    for (int s = 0; s < steps; ++s) {
      double sum = 0.0;
      for (int i = 0; i < N; ++i) sum += at(d, s, i);
      const double avg = sum / N;
      between += avg * avg;
      for (int i = 0; i < N; ++i) within += (at(d, s, i) - avg) * (at(d, s, i) - avg);
    }
  const double v_avg = between / (static_cast<double>(steps) * (D - 1));
  VolatilityEstimate est;
  if (N < 2) {
    est.total = std::sqrt(v_avg / dt);
    est.sigma0 = est.total;
    return est;
  }
  const double v_within = within / (static_cast<double>(steps) * D * (N - 1));
  const double sigma_sq = v_within / dt;
  const double sigma0_sq = std::max(0.0, v_avg / dt - sigma_sq / N);
  est.sigma = std::sqrt(sigma_sq);
  est.sigma0 = std::sqrt(sigma0_sq);
  est.total = std::sqrt(sigma0_sq + sigma_sq);
  est.sigma_available = true;
  return est;
}

PriceFit fit_price_curve(const std::vector<std::pair<double, double>>& pts) {
  const std::size_t n = pts.size();
  if (n < 2) throw std::invalid_argument("fit_price_curve: need at least 2 points");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_price_curve: all demand values are equal");
  PriceFit fit;
  fit.p1 = sxy / sxx;
  fit.p0 = my - fit.p1 * mx;
  if (n > 2) {
    double rss = 0.0;
    for (const auto& [x, y] : pts) {
      const double e = y - (fit.p0 + fit.p1 * x);
      rss += e * e;
    }
    const double s2 = rss / (n - 2);
    fit.p1_std_error = std::sqrt(s2 / sxx);
    fit.p0_std_error = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  }
  return fit;
}

std::string format_calibration(const CalibrationResult& r) {
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::string out;
  out += "model.sigma0 = " + num(r.sigma0_hat) + "\n";
  out += "model.sigma = " + num(r.sigma_hat) + "\n";
  out += "model.sigma_st = " + num(r.sigma_st_hat) + "\n";
  if (r.has_price) {
    out += "model.p0 = " + num(r.p0_hat) + "\n";
    out += "model.p1 = " + num(r.p1_hat) + "\n";
    if (!r.price_units.empty()) out += "calibration.price_units = " + r.price_units + "\n";
  }
  out += "calibration.seasonality =";
  for (std::size_t i = 0; i < r.seasonality.size(); ++i)
    out += (i ? "," : " ") + num(r.seasonality[i]);
  out += "\n";
  return out;
}

ConsumptionPanel synthesize_panel(const PanelSpec& spec) {
  const int S = static_cast<int>(spec.seasonality.size());
  if (S < 2 || spec.days < 1 || spec.meters < 1)
    throw std::invalid_argument("synthesize_panel: need 2+ slots, 1+ day and 1+ meter");
  ModelParams params;
  params.q0 = params.q0_st = 1.0;
  params.mu = params.mu_st = spec.mu;
  params.sigma0 = params.sigma_st = spec.sigma0;
  params.sigma = spec.sigma;
  params.lambda0 = 0.0;
  const GridSpec grid = make_grid(S * spec.dt, S, 0.0);
  ConsumptionPanel panel;
  panel.slot_count = S;
  panel.day_count = spec.days;
  panel.meter_count = spec.meters;
  panel.values.resize(static_cast<std::size_t>(S) * spec.days * spec.meters);
  for (int m = 0; m < spec.meters; ++m) panel.meter_ids.push_back("m" + std::to_string(m));
  for (int d = 0; d < spec.days; ++d) {
    const CommonPath common = simulate_common_path(params, grid, spec.seed, d);
    for (int m = 0; m < spec.meters; ++m) {
      const PlayerPath player = simulate_player_path(common, params, grid, spec.seed, d, m);
      for (int s = 0; s < S; ++s) panel.at(d, s, m) = spec.seasonality[s] * player.q[s];
    }
  }
  return panel;
}

}  // namespace dsm
