#include "dsm/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "dsm/calibration.hpp"
#include "dsm/cli/csv.hpp"
#include "dsm/control.hpp"
#include "dsm/costs.hpp"
#include "dsm/error.hpp"

namespace dsm::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string kv(const std::string& key, const std::string& value) {
  return key + " = " + value + "\n";
}

std::string kv(const std::string& key, double value) { return kv(key, format_double(value)); }

std::string numbered(const char* stem, int index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04d.csv", stem, index);
  return buf;
}

}  // namespace

PriceSpec scenario_price(const Scenario& sc) {
  return make_price_spec(sc.params, sc.mode, sc.agg_double_f);
}

GridSpec scenario_grid(const Scenario& sc) {
  return make_grid(sc.params.T, sc.n_steps, sc.params.lambda0);
}

std::string cmd_solve(const Scenario& sc) {
  validate_scenario(sc);
  const std::string dir = resolved_output_dir(sc);
  const EquilibriumTables t = solve_equilibrium(sc.params, scenario_grid(sc), scenario_price(sc));
  const int n = t.grid.n_steps;

  Table phi{{"k", "t", "phi", "phi_closed_form"}, {}};
  for (int k = 0; k <= n; ++k)
    phi.rows.push_back({double(k), k * t.grid.dt, t.phi.discrete[k], t.phi.closed_form[k]});
  write_table(join(dir, "phi.csv"), phi);

  Table phibar{{"k", "r", "phi_bar", "denom"}, {}};
  for (int k = 0; k <= n; ++k)
    for (int slot = 0; slot <= k + 1; ++slot) {
      const int r = age_from_slot(slot);
      phibar.rows.push_back({double(k), double(r), t.phibar.at(k, r), t.phibar.denom_at(k, r)});
    }
  write_table(join(dir, "phibar.csv"), phibar);

  Table psibar{{"k", "m", "r", "psi_bar"}, {}};
  for (int k = 0; k <= n; ++k)
    for (int slot = 0; slot <= k + 1; ++slot)
      for (int m = 0; m <= k; ++m) {
        const int r = age_from_slot(slot);
        psibar.rows.push_back({double(k), double(m), double(r), t.psibar.at(k, m, r)});
      }
  write_table(join(dir, "psibar.csv"), psibar);

  Table a{{"k", "a", "gamma"}, {}};
  for (int k = 0; k <= n; ++k) a.rows.push_back({double(k), t.affine.a[k], t.affine.gamma[k]});
  write_table(join(dir, "a_coef.csv"), a);

  std::string manifest;
  manifest += kv("tool", "dsm-mfg");
  manifest += kv("version", kVersion);
  manifest += kv("command", "solve");
  manifest += kv("param_hash", solve_hash(sc));
  manifest += kv("mode", mode_name(sc.mode));
  manifest += kv("n_steps", std::to_string(n));
  manifest += kv("files", "phi.csv,phibar.csv,psibar.csv,a_coef.csv");
  manifest += "\n# scenario\n" + serialize_scenario(sc);
  write_text(join(dir, "manifest.txt"), manifest);
  return dir;
}

EquilibriumTables load_tables(const Scenario& sc, const std::string& dir) {
  const std::string manifest = read_text(join(dir, "manifest.txt"));
  if (manifest.find("param_hash = " + solve_hash(sc) + "\n") == std::string::npos)
    throw MissingArtifact("solve artifacts in '" + dir +
                          "' were produced for a different scenario; rerun solve");
  EquilibriumTables t;
  t.params = sc.params;
  t.grid = scenario_grid(sc);
  t.price = scenario_price(sc);
  t.geo = Geometry(t.params, t.grid);
  const int n = t.grid.n_steps;
  auto load = [&](const char* name, std::size_t rows, std::size_t cols) {
    Table tab = read_table(join(dir, name));
    if (tab.rows.size() != rows || tab.header.size() != cols)
      throw MissingArtifact(std::string("artifact '") + name + "' has an unexpected shape");
    return tab;
  };
  const Table phi = load("phi.csv", n + 1, 4);
  t.phi.C = t.params.C;
  t.phi.D = t.params.A + t.params.K;
  t.phi.h2 = t.params.h2;
  t.phi.T = t.grid.horizon;
  for (const auto& r : phi.rows) {
    t.phi.discrete.push_back(r[2]);
    t.phi.closed_form.push_back(r[3]);
  }
  const Table phibar = load("phibar.csv", RiccatiTable::size_for(n), 4);
  t.phibar.n_steps = n;
  for (const auto& r : phibar.rows) {
    t.phibar.values.push_back(r[2]);
    t.phibar.denom.push_back(r[3]);
  }
  const Table psibar = load("psibar.csv", PsiBarTable::size_for(n), 4);
  t.psibar.n_steps = n;
  for (const auto& r : psibar.rows) t.psibar.values.push_back(r[3]);
  const Table a = load("a_coef.csv", n + 1, 3);
  for (const auto& r : a.rows) {
    t.affine.a.push_back(r[1]);
    t.affine.gamma.push_back(r[2]);
  }
  t.affine.m_inner = sc.m_inner;
  return t;
}

std::string cmd_simulate(const Scenario& sc) {
  validate_scenario(sc);
  check_walk_refinement(sc.params, scenario_grid(sc));
  const std::string dir = resolved_output_dir(sc);
  const EquilibriumTables t = load_tables(sc, dir);
  const ModelParams& p = t.params;
  const int n = t.grid.n_steps;
  const double dt = t.grid.dt;

  std::vector<double> sum_alpha(n + 1, 0.0), sum_price(n + 1, 0.0), sum_j(n + 1, 0.0),
      sum_s(n + 1, 0.0);
  double effort = 0.0, dev_sum = 0.0, peak_price = 0.0, cost_sum = 0.0, cost_sq = 0.0;
  double lln_gap = 0.0;
  long dev_count = 0, cost_count = 0;
  double sa = 0.0, sq = 0.0, saa = 0.0, sqq = 0.0, saq = 0.0;
  long pooled = 0;

  for (int path = 0; path < sc.n_common_paths; ++path) {
    CommonPath common = simulate_common_path(p, t.grid, sc.seed, path);
    forward_common_control(common, t);
    BOptions opt;
    opt.mode = sc.b_mode == "nested" ? BMode::NestedMC : BMode::Exact;
    opt.m_inner = sc.m_inner;
    opt.seed = sc.seed;
    opt.path_index = path;
    const auto est = b_along_path(common, t, opt);
    std::vector<double> b(est.size());
    for (std::size_t k = 0; k < est.size(); ++k) b[k] = est[k].mean;
    const auto players = nplayer_profile(sc.n_players, common, t, b, sc.seed, path);
    const Aggregate agg = projected_aggregate(common);

    std::vector<double> price(n + 1);
    double path_effort = 0.0;
    for (int k = 0; k <= n; ++k) {
      price[k] = p.p0 + p.p1 * (p.pi * common.q_st[k] + (1.0 - p.pi) * agg.level[k]);
      sum_alpha[k] += common.alpha_hat[k];
      sum_price[k] += price[k];
      sum_j[k] += common.J[k];
      sum_s[k] += common.s_hat[k];
      if (k < n) {
        path_effort += std::abs(common.alpha_hat[k]);
        if (common.J[k]) {
          dev_sum += std::abs(agg.centred[k] - p.alpha_bar);
          ++dev_count;
        }
        sa += common.alpha_hat[k];
        sq += common.q_hat[k];
        saa += common.alpha_hat[k] * common.alpha_hat[k];
        sqq += common.q_hat[k] * common.q_hat[k];
        saq += common.alpha_hat[k] * common.q_hat[k];
        ++pooled;
      }
    }
    effort += path_effort / n;
    for (int k = 0; k < n; ++k) {
      double mean_alpha = 0.0;
      for (const auto& pl : players) mean_alpha += pl.alpha_star[k];
      mean_alpha /= players.size();
      lln_gap = std::max(lln_gap, std::abs(mean_alpha - common.alpha_hat[k]));
    }
    for (const auto& pl : players) {
      const double c =
          path_cost(p, t.grid, common, pl.q, pl.alpha_star, pl.s_star, agg).total();
      cost_sum += c;
      cost_sq += c * c;
      ++cost_count;
    }

    if (path < sc.n_saved_paths) {
      Table traj{{"k", "t", "q_hat", "q_st", "R", "J", "alpha_hat", "s_hat", "price", "q_i",
                  "alpha_star_i", "s_star_i"},
                 {}};
      const PlayerPath& first = players[0];
      for (int k = 0; k <= n; ++k)
        traj.rows.push_back({double(k), k * dt, common.q_hat[k], common.q_st[k], common.R[k],
                             double(common.J[k]), common.alpha_hat[k], common.s_hat[k],
                             price[k], first.q[k], first.alpha_star[k], first.s_star[k]});
      write_table(join(dir, numbered("trajectory", path)), traj);
      Table pl{{"player", "k", "q", "psi", "alpha_star", "s_star"}, {}};
      for (std::size_t i = 0; i < players.size(); ++i)
        for (int k = 0; k <= n; ++k)
          pl.rows.push_back({double(i), double(k), players[i].q[k], players[i].psi[k],
                             players[i].alpha_star[k], players[i].s_star[k]});
      write_table(join(dir, numbered("players", path)), pl);
      // eps and eta on row k drive the move from k to k + 1; the last row has none.
      Table noise{{"k", "t", "eps", "eta", "q_hat", "q_st", "R", "J", "mean_q"}, {}};
      for (int k = 0; k <= n; ++k) {
        const bool has_move = k < n;
        noise.rows.push_back({double(k), k * dt,
                              has_move ? double(common.increments[k].eps) : 0.0,
                              has_move ? common.increments[k].eta : 0.0, common.q_hat[k],
                              common.q_st[k], common.R[k], double(common.J[k]),
                              common.mean_q[k]});
      }
      write_table(join(dir, numbered("common", path)), noise);
    }
  }

  const double paths = sc.n_common_paths;
  Table by_step{{"k", "t", "mean_alpha_hat", "mean_s_hat", "mean_price", "activation_share"}, {}};
  for (int k = 0; k <= n; ++k) {
    by_step.rows.push_back({double(k), k * dt, sum_alpha[k] / paths, sum_s[k] / paths,
                            sum_price[k] / paths, sum_j[k] / paths});
    if (k < n) peak_price = std::max(peak_price, sum_price[k] / paths);
  }
  write_table(join(dir, "summary_by_step.csv"), by_step);

  const double mean_cost = cost_sum / cost_count;
  const double cost_se =
      cost_count > 1
          ? std::sqrt(std::max(0.0, cost_sq / cost_count - mean_cost * mean_cost) /
                      (cost_count - 1))
          : 0.0;
  const double ma = sa / pooled, mq = sq / pooled;
  const double cov = saq / pooled - ma * mq;
  const double va = saa / pooled - ma * ma, vq = sqq / pooled - mq * mq;
  const double corr = (va > 0.0 && vq > 0.0) ? cov / std::sqrt(va * vq) : 0.0;

  std::string summary;
  summary += kv("mode", mode_name(sc.mode));
  summary += kv("n_common_paths", std::to_string(sc.n_common_paths));
  summary += kv("n_players", std::to_string(sc.n_players));
  summary += kv("b_mode", sc.b_mode);
  summary += kv("mean_abs_alpha_hat", effort / paths);
  summary += kv("corr_alpha_hat_q_hat", corr);
  summary += kv("peak_mean_price", peak_price);
  summary += kv("activation_mean_abs_deviation",
                dev_count ? dev_sum / dev_count : 0.0);
  summary += kv("activation_steps_observed", std::to_string(dev_count));
  summary += kv("max_player_mean_minus_alpha_hat", lln_gap);
  summary += kv("mean_player_cost", mean_cost);
  summary += kv("mean_player_cost_std_error", cost_se);
  write_text(join(dir, "summary.txt"), summary);
  return dir;
}

std::string cmd_nash_gap(const Scenario& sc) {
  validate_scenario(sc);
  const std::string dir = resolved_output_dir(sc);
  const EquilibriumTables t = solve_equilibrium(sc.params, scenario_grid(sc), scenario_price(sc));
  Table rows{{"n_players", "gap", "gap_std_error", "j_n_i", "j_n_i_std_error", "j_mfg",
              "j_mfg_std_error", "deviation_gain", "deviation_std_error"},
             {}};
  std::string text;
  text += kv("mode", mode_name(sc.mode));
  text += kv("mc_samples", std::to_string(sc.mc_samples));
  for (int n_players : sc.nash_n_list) {
    const NashGapReport r = nash_gap(n_players, t, sc.mc_samples, sc.seed);
    rows.rows.push_back({double(n_players), r.gap, r.gap_std_error, r.j_n_i.mean,
                         r.j_n_i.std_error, r.j_mfg.mean, r.j_mfg.std_error, r.deviation_gain,
                         r.deviation_std_error});
    const std::string prefix = "n" + std::to_string(n_players) + ".";
    text += kv(prefix + "gap", r.gap);
    text += kv(prefix + "gap_std_error", r.gap_std_error);
    text += kv(prefix + "j_n_i", r.j_n_i.mean);
    text += kv(prefix + "j_mfg", r.j_mfg.mean);
    text += kv(prefix + "deviation_gain", r.deviation_gain);
  }
  write_table(join(dir, "nash_gap.csv"), rows);
  write_text(join(dir, "nash_gap.txt"), text);
  return dir;
}

namespace {

std::string setting(const Scenario& sc, const std::string& key, const std::string& fallback) {
  const auto it = sc.calibration.find(key);
  return it == sc.calibration.end() ? fallback : it->second;
}

double setting_number(const Scenario& sc, const std::string& key, double fallback) {
  const auto it = sc.calibration.find(key);
  if (it == sc.calibration.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number");
  }
}

}  // namespace

std::string cmd_calibrate(const Scenario& sc) {
  const std::string data = setting(sc, "calibration.data", "");
  if (data.empty()) throw ConfigError("config key 'calibration.data': required by calibrate");
  if (!fs::exists(data))
    throw ConfigError("config key 'calibration.data': file '" + data + "' does not exist");
  FormatSpec fmt;
  const std::string sep = setting(sc, "calibration.separator", ",");
  if (sep == "tab")
    fmt.separator = '\t';
  else if (sep.size() == 1)
    fmt.separator = sep[0];
  else
    throw ConfigError("config key 'calibration.separator': one character or 'tab'");
  fmt.meter_column = setting(sc, "calibration.meter_column", fmt.meter_column);
  fmt.time_column = setting(sc, "calibration.time_column", fmt.time_column);
  fmt.value_column = setting(sc, "calibration.value_column", fmt.value_column);
  fmt.slot_count = static_cast<int>(setting_number(sc, "calibration.slot_count", 48));
  fmt.max_bad_fraction = setting_number(sc, "calibration.max_bad_fraction", 0.01);
  if (fmt.slot_count < 2) throw ConfigError("config key 'calibration.slot_count': at least 2");
  const double dt = setting_number(sc, "calibration.dt", 24.0 / fmt.slot_count);

  IngestReport rep;
  const ConsumptionPanel panel = ingest_csv(data, fmt, &rep);
  CalibrationResult res;
  res.seasonality = estimate_seasonality(panel);
  const auto se = seasonality_std_errors(panel);
  const VolatilityEstimate vol = estimate_volatilities(panel, res.seasonality, dt);
  res.sigma0_hat = vol.sigma0;
  res.sigma_hat = vol.sigma;
  res.sigma_st_hat = vol.sigma0;

  const std::string price_data = setting(sc, "calibration.price_data", "");
  if (!price_data.empty()) {
    const Table tab = read_table(price_data);
    const int cd = tab.column(setting(sc, "calibration.price_demand_column", "demand"));
    const int cp = tab.column(setting(sc, "calibration.price_column", "price"));
    if (cd < 0 || cp < 0)
      throw ConfigError("config key 'calibration.price_data': demand or price column missing");
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : tab.rows) pts.emplace_back(r[cd], r[cp]);
    const PriceFit fit = fit_price_curve(pts);
    res.has_price = true;
    res.p0_hat = fit.p0;
    res.p1_hat = fit.p1;
    res.price_units = setting(sc, "calibration.price_units", "");
  }

  const std::string dir = resolved_output_dir(sc);
  write_text(join(dir, "calibration.txt"), format_calibration(res));
  std::string report;
  report += kv("rows_read", std::to_string(rep.rows_read));
  report += kv("rows_malformed", std::to_string(rep.rows_malformed));
  report += kv("days_dropped", std::to_string(rep.days_dropped));
  report += kv("days", std::to_string(panel.day_count));
  report += kv("meters", std::to_string(panel.meter_count));
  report += kv("slot_count", std::to_string(panel.slot_count));
  report += kv("dt_hours", dt);
  report += kv("sigma_available", vol.sigma_available ? "true" : "false");
  report += kv("total_volatility", vol.total);
  std::string lines;
  for (std::size_t i = 0; i < rep.malformed_lines.size(); ++i)
    lines += (i ? "," : "") + std::to_string(rep.malformed_lines[i]);
  report += kv("malformed_lines", lines);
  write_text(join(dir, "calibration_report.txt"), report);
  Table season{{"slot", "seasonality", "std_error"}, {}};
  for (std::size_t s = 0; s < res.seasonality.size(); ++s)
    season.rows.push_back({double(s), res.seasonality[s], se[s]});
  write_table(join(dir, "seasonality.csv"), season);
  return dir;
}

void cmd_plot(const std::string& csv_path, const PlotSpec& spec, const std::string& svg_path) {
  const Table tab = read_table(csv_path);
  write_text(svg_path, render_svg(tab, spec));
}

}  // namespace dsm::cli
