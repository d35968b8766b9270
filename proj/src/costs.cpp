#include "dsm/costs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "dsm/kernels.hpp"

namespace dsm {

Aggregate projected_aggregate(const CommonPath& common) {
  Aggregate agg;
  const std::size_t n = common.alpha_hat.size();
  if (n != common.q_hat.size())
    throw std::invalid_argument("projected_aggregate: run forward_common_control first");
  agg.level.resize(n);
  agg.centred.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    agg.level[k] = common.q_hat[k] + common.alpha_hat[k];
    agg.centred[k] = agg.level[k] - common.mean_q[k];
  }
  return agg;
}

namespace {

inline double market_price(const ModelParams& p, double q_st, double level) {
  return p.p0 + p.p1 * (p.pi * q_st + (1.0 - p.pi) * level);
}

inline double penalty_rate(const ModelParams& p, double centred) {
  return p.f0 + p.f1 * (centred - p.alpha_bar);
}

inline double terminal_cost(const ModelParams& p, double s) {
  return p.h0 + p.h1 * s + 0.5 * p.h2 * (s * s);
}

}  // namespace

CostBreakdown path_cost(const ModelParams& params, const GridSpec& grid,
                        const CommonPath& common, std::span<const double> q,
                        std::span<const double> alpha, std::span<const double> s,
                        const Aggregate& agg) {
  const int n = grid.n_steps;
  if (static_cast<int>(q.size()) < n || static_cast<int>(alpha.size()) < n ||
      static_cast<int>(s.size()) < n + 1 || static_cast<int>(agg.level.size()) < n)
    throw std::invalid_argument("path_cost: trajectory shorter than the grid");
  const double dt = grid.dt;
  const double half_a = 0.5 * params.A, half_c = 0.5 * params.C, half_k = 0.5 * params.K;
  CostBreakdown c;
  for (int k = 0; k < n; ++k) {
    const double u = alpha[k];
    const double x = q[k] + u;
    const double target = common.mean_q[k] + params.alpha_bar;
    c.g += dt * (half_a * (u * u));
    c.storage += dt * (half_c * (s[k] * s[k]));
    c.l += dt * (half_k * (x * x));
    c.c += dt * (x * market_price(params, common.q_st[k], agg.level[k]));
    const double active = common.J[k] ? 1.0 : 0.0;
    c.d += dt * (active * ((x - target) * penalty_rate(params, agg.centred[k])));
  }
  c.h = terminal_cost(params, s[n]);
  return c;
}

double Direction::operator()(int k, const GridSpec& grid, const CommonPath& common,
                             const PlayerPath& player) const {
  const double hours = k * grid.dt;
  double v = level + daily * std::sin(2.0 * std::numbers::pi * hours / 24.0 + phase);
  if (common.J[k]) v += activation;
  v += demand * std::tanh(player.q[k] - common.mean_q[k]);
  return v;
}

Direction Direction::random(Stream& stream) {
  auto draw = [&] { return stream.uniform() - 0.5; };
  Direction d;
  d.level = draw();
  d.daily = draw();
  d.phase = 2.0 * std::numbers::pi * stream.uniform();
  d.activation = draw();
  d.demand = draw();
  return d;
}

CostEstimate summarize(std::span<const double> totals, std::span<const CostBreakdown> parts) {
  CostEstimate est;
  const std::size_t n = totals.size();
  est.n_samples = n;
  if (n == 0) return est;
  double sum = 0.0;
  for (double v : totals) sum += v;
  est.mean = sum / n;
  if (n >= 2) {
    double ss = 0.0;
    for (double v : totals) ss += (v - est.mean) * (v - est.mean);
    est.std_error = std::sqrt(ss / (n - 1) / n);
  }
  for (const auto& p : parts) {
    est.breakdown.g += p.g;
    est.breakdown.storage += p.storage;
    est.breakdown.l += p.l;
    est.breakdown.c += p.c;
    est.breakdown.d += p.d;
    est.breakdown.h += p.h;
  }
  if (!parts.empty()) {
    const double inv = 1.0 / parts.size();
    est.breakdown.g *= inv;
    est.breakdown.storage *= inv;
    est.breakdown.l *= inv;
    est.breakdown.c *= inv;
    est.breakdown.d *= inv;
    est.breakdown.h *= inv;
  }
  return est;
}

namespace {

struct Sample {
  CommonPath common;
  PlayerPath player;
  Aggregate agg;
};

std::vector<double> exact_b_values(const CommonPath& common, const EquilibriumTables& t) {
  const auto est = b_along_path(common, t, BOptions{});
  std::vector<double> b(est.size());
  for (std::size_t k = 0; k < est.size(); ++k) b[k] = est[k].mean;
  return b;
}

Sample equilibrium_sample(const EquilibriumTables& t, std::uint64_t seed, std::uint64_t i) {
  Sample s;
  s.common = simulate_common_path(t.params, t.grid, seed, i);
  forward_common_control(s.common, t);
  const auto b = exact_b_values(s.common, t);
  s.player = simulate_player_path(s.common, t.params, t.grid, seed, i, 0);
  forward_player_control(s.player, s.common, t, b);
  s.agg = projected_aggregate(s.common);
  return s;
}

// Cost of the open-loop control alpha* + step beta (or 0 when lazy) for one sample.
CostBreakdown perturbed_cost(const EquilibriumTables& t, const Sample& smp,
                             const Direction* beta, double step, bool lazy,
                             const Aggregate& agg) {
  const int n = t.grid.n_steps;
  std::vector<double> u(n + 1), s(n + 1);
  s[0] = smp.player.s0;
  for (int k = 0; k <= n; ++k) {
    if (lazy)
      u[k] = 0.0;
    else {
      u[k] = smp.player.alpha_star[k];
      if (beta) u[k] += step * (*beta)(k, t.grid, smp.common, smp.player);
    }
    if (k < n) s[k + 1] = s[k] + t.grid.dt * u[k];
  }
  return path_cost(t.params, t.grid, smp.common, smp.player.q, u, s, agg);
}

void require_paths(int n_paths) {
  if (n_paths < 2) throw std::invalid_argument("cost evaluation needs at least 2 paths");
}

}  // namespace

CostEstimate eval_j_mfg(const EquilibriumTables& t, int n_paths, const EvalOptions& options) {
  require_paths(n_paths);
  std::vector<double> totals(n_paths);
  std::vector<CostBreakdown> parts(n_paths);
  for (int i = 0; i < n_paths; ++i) {
    const Sample smp = equilibrium_sample(t, options.seed, i);
    parts[i] = perturbed_cost(t, smp, options.beta, options.step, options.lazy, smp.agg);
    totals[i] = parts[i].total();
  }
  return summarize(totals, parts);
}

CostEstimate eval_j_central(const EquilibriumTables& t, int n_paths, std::uint64_t seed) {
  require_paths(n_paths);
  const ModelParams& p = t.params;
  const double share = 1.0 - p.pi;
  std::vector<double> totals(n_paths);
  std::vector<CostBreakdown> parts(n_paths);
  for (int i = 0; i < n_paths; ++i) {
    const Sample smp = equilibrium_sample(t, seed, i);
    CostBreakdown c = perturbed_cost(t, smp, nullptr, 0.0, false, smp.agg);
    c.g *= share;
    c.storage *= share;
    c.l *= share;
    c.c *= share;
    c.d *= share;
    c.h *= share;
    // Standard consumers pay the market price and their own demand charge.
    for (int k = 0; k < t.grid.n_steps; ++k) {
      const double qs = smp.common.q_st[k];
      c.c += p.pi * t.grid.dt * (qs * market_price(p, qs, smp.agg.level[k]));
      c.l += p.pi * t.grid.dt * (0.5 * p.K * (qs * qs));
    }
    parts[i] = c;
    totals[i] = c.total();
  }
  return summarize(totals, parts);
}

GateauxResult gateaux_residual(const EquilibriumTables& t, const Direction& beta,
                               double eps_step, int n_paths, std::uint64_t seed) {
  if (!(eps_step > 0.0)) throw std::invalid_argument("gateaux_residual: eps_step must be > 0");
  require_paths(n_paths);
  std::vector<double> diffs(n_paths), base(n_paths);
  for (int i = 0; i < n_paths; ++i) {
    const Sample smp = equilibrium_sample(t, seed, i);
    const double up = perturbed_cost(t, smp, &beta, eps_step, false, smp.agg).total();
    const double down = perturbed_cost(t, smp, &beta, -eps_step, false, smp.agg).total();
    base[i] = perturbed_cost(t, smp, nullptr, 0.0, false, smp.agg).total();
    diffs[i] = (up - down) / (2.0 * eps_step);
  }
  const CostEstimate d = summarize(diffs, {});
  const CostEstimate j = summarize(base, {});
  return {d.mean, d.std_error, std::abs(j.mean)};
}

namespace {

// Deviations tried by player 1 in the n-player game.
struct Deviation {
  Direction beta;
  bool lazy = false;
};

std::vector<Deviation> deviation_family() {
  std::vector<Deviation> out;
  for (double scale : {-0.2, 0.2}) {
    Deviation lvl;
    lvl.beta.level = scale;
    out.push_back(lvl);
    Deviation act;
    act.beta.activation = scale;
    out.push_back(act);
    Deviation dem;
    dem.beta.demand = scale;
    out.push_back(dem);
  }
  Deviation lazy;
  lazy.lazy = true;
  out.push_back(lazy);
  return out;
}

}  // namespace

NashGapReport nash_gap(int n_players, const EquilibriumTables& t, int n_mc,
                       std::uint64_t seed) {
  if (n_players < 1) throw std::invalid_argument("nash_gap: n_players must be >= 1");
  require_paths(n_mc);
  const ModelParams& p = t.params;
  const GridSpec& grid = t.grid;
  const int n = grid.n_steps;
  const double sd = std::sqrt(grid.dt);
  const auto family = deviation_family();

  std::vector<double> gap_samples(n_mc), player_n(n_mc), player_mfg(n_mc);
  std::vector<CostBreakdown> parts_n(n_mc), parts_mfg(n_mc);
  std::vector<std::vector<double>> gains(family.size(), std::vector<double>(n_mc));

  std::vector<double> q_emp(n_players), s_emp(n_players), q_prj(n_players), s_prj(n_players);
  std::vector<double> alpha(n_players), idio(n_players);
  std::vector<double> acc_emp(5 * static_cast<std::size_t>(n_players));
  std::vector<double> acc_prj(5 * static_cast<std::size_t>(n_players));
  std::vector<double> avg(n + 1);

  for (int path = 0; path < n_mc; ++path) {
    CommonPath common = simulate_common_path(p, grid, seed, path);
    forward_common_control(common, t);
    const auto b = exact_b_values(common, t);
    const auto players = nplayer_profile(n_players, common, t, b, seed, path);
    const Aggregate proj = projected_aggregate(common);

    for (int i = 0; i < n_players; ++i) {
      q_emp[i] = q_prj[i] = players[i].q[0];
      s_emp[i] = s_prj[i] = players[i].s0;
    }
    std::fill(acc_emp.begin(), acc_emp.end(), 0.0);
    std::fill(acc_prj.begin(), acc_prj.end(), 0.0);
    auto bind = [&](kernels::PlayerAdvance& adv, std::vector<double>& acc) {
      adv.acc_g = acc.data();
      adv.acc_storage = acc.data() + n_players;
      adv.acc_l = acc.data() + 2 * n_players;
      adv.acc_c = acc.data() + 3 * n_players;
      adv.acc_d = acc.data() + 4 * n_players;
    };
    for (int k = 0; k < n; ++k) {
      double sum = 0.0;
      for (int i = 0; i < n_players; ++i) {
        alpha[i] = players[i].alpha_star[k];
        idio[i] = players[i].idio[k];
        sum += players[i].q[k] + alpha[i];
      }
      avg[k] = sum / n_players;
      kernels::PlayerAdvance adv;
      adv.count = n_players;
      adv.alpha = alpha.data();
      adv.idio = idio.data();
      adv.dt = grid.dt;
      adv.A = p.A;
      adv.C = p.C;
      adv.K = p.K;
      adv.active = common.J[k] ? 1.0 : 0.0;
      adv.target = common.mean_q[k] + p.alpha_bar;
      adv.growth = (1.0 + grid.dt * p.mu) + sd * p.sigma0 * common.increments[k].eps;
      adv.vol = sd * p.sigma;

      adv.q = q_emp.data();
      adv.s = s_emp.data();
      adv.price = market_price(p, common.q_st[k], avg[k]);
      adv.penalty = penalty_rate(p, avg[k] - common.mean_q[k]);
      bind(adv, acc_emp);
      kernels::player_advance(adv);

      adv.q = q_prj.data();
      adv.s = s_prj.data();
      adv.price = market_price(p, common.q_st[k], proj.level[k]);
      adv.penalty = penalty_rate(p, proj.centred[k]);
      bind(adv, acc_prj);
      kernels::player_advance(adv);
    }

    auto breakdown = [&](const std::vector<double>& acc, const std::vector<double>& s, int i) {
      CostBreakdown c;
      c.g = acc[i];
      c.storage = acc[n_players + i];
      c.l = acc[2 * n_players + i];
      c.c = acc[3 * n_players + i];
      c.d = acc[4 * n_players + i];
      c.h = terminal_cost(p, s[i]);
      return c;
    };
    double diff = 0.0;
    for (int i = 0; i < n_players; ++i)
      diff += breakdown(acc_emp, s_emp, i).total() - breakdown(acc_prj, s_prj, i).total();
    gap_samples[path] = diff / n_players;
    parts_n[path] = breakdown(acc_emp, s_emp, 0);
    parts_mfg[path] = breakdown(acc_prj, s_prj, 0);
    player_n[path] = parts_n[path].total();
    player_mfg[path] = parts_mfg[path].total();

    // Unilateral deviations of player 1; the others keep the profile and the
    // empirical aggregate moves by the deviation's share.
    const PlayerPath& first = players[0];
    Aggregate emp;
    emp.level.resize(n + 1);
    emp.centred.resize(n + 1);
    for (int k = 0; k < n; ++k) {
      emp.level[k] = avg[k];
      emp.centred[k] = avg[k] - common.mean_q[k];
    }
    const double base = path_cost(p, grid, common, first.q, first.alpha_star, first.s_star, emp)
                            .total();
    std::vector<double> u(n + 1), s(n + 1);
    Aggregate dev = emp;
    for (std::size_t f = 0; f < family.size(); ++f) {
      s[0] = first.s0;
      for (int k = 0; k < n; ++k) {
        u[k] = family[f].lazy ? 0.0
                              : first.alpha_star[k] + family[f].beta(k, grid, common, first);
        s[k + 1] = s[k] + grid.dt * u[k];
        dev.level[k] = avg[k] + (u[k] - first.alpha_star[k]) / n_players;
        dev.centred[k] = dev.level[k] - common.mean_q[k];
      }
      gains[f][path] = base - path_cost(p, grid, common, first.q, u, s, dev).total();
    }
  }

  NashGapReport rep;
  rep.n_players = n_players;
  rep.j_n_i = summarize(player_n, parts_n);
  rep.j_mfg = summarize(player_mfg, parts_mfg);
  const CostEstimate g = summarize(gap_samples, {});
  rep.gap = std::abs(g.mean);
  rep.gap_std_error = g.std_error;
  rep.deviation_gain = -std::numeric_limits<double>::infinity();
  for (const auto& series : gains) {
    const CostEstimate e = summarize(series, {});
    if (e.mean > rep.deviation_gain) {
      rep.deviation_gain = e.mean;
      rep.deviation_std_error = e.std_error;
    }
  }
  return rep;
}

}  // namespace dsm
