#include "dsm/control.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dsm/kernels.hpp"

namespace dsm {

EquilibriumTables solve_equilibrium(const ModelParams& params, const GridSpec& grid,
                                    const PriceSpec& price) {
  params.validate();
  validate_grid(grid);
  check_walk_refinement(params, grid);
  EquilibriumTables t;
  t.params = params;
  t.grid = grid;
  t.price = price;
  t.geo = Geometry(params, grid);
  t.phi = solve_phi_ode(params, grid);
  t.phibar = solve_phibar(params, grid, price);
  t.psibar = solve_psibar(params, grid, price, t.phibar);
  t.affine.a = solve_a_coefficient(params, grid, t.phi);
  t.affine.gamma = discount_factors(params, grid, t.phi);
  return t;
}

namespace {
inline double projected_driver(const EquilibriumTables& t, int k, int m, int r) {
  const double q_hat = t.geo.q_hat(k, m);
  double h = t.price.a0 + t.price.a_st * t.geo.q_st(k, m) + (t.price.a1 + t.params.K) * q_hat;
  if (t.geo.active(r))
    h += t.price.f0_eff + t.price.f1_eff * (q_hat - t.geo.mean_q(k) - t.params.alpha_bar);
  return h;
}
}  // namespace

double projected_alpha(const EquilibriumTables& t, int k, int m, int r, double s_hat) {
  const double h = projected_driver(t, k, m, r);
  return -(h + t.phibar.at(k, r) * s_hat + t.psibar.at(k, m, r)) / t.phibar.denom_at(k, r);
}

double common_driver(const EquilibriumTables& t, int k, int m, int r, double alpha_hat) {
  const double q_hat = t.geo.q_hat(k, m);
  double g = t.price.a0 + t.price.a_st * t.geo.q_st(k, m) + t.price.a1 * (q_hat + alpha_hat);
  if (t.geo.active(r))
    g += t.price.f0_eff +
         t.price.f1_eff * (q_hat - t.geo.mean_q(k) + alpha_hat - t.params.alpha_bar);
  return g;
}

namespace {
void check_path(const CommonPath& common, const EquilibriumTables& t) {
  if (common.n_steps() != t.grid.n_steps)
    throw std::invalid_argument("common path and tables use different grids");
}
}  // namespace

void forward_common_control(CommonPath& common, const EquilibriumTables& t) {
  check_path(common, t);
  const int n = t.grid.n_steps;
  common.s_hat.assign(n + 1, 0.0);
  common.alpha_hat.assign(n + 1, 0.0);
  common.phi_bar.assign(n + 1, 0.0);
  common.psi_bar.assign(n + 1, 0.0);
  common.s_hat[0] = t.params.s0.mean();
  for (int k = 0; k <= n; ++k) {
    const int m = common.up_count[k], r = common.age[k];
    common.phi_bar[k] = t.phibar.at(k, r);
    common.psi_bar[k] = t.psibar.at(k, m, r);
    common.alpha_hat[k] = projected_alpha(t, k, m, r, common.s_hat[k]);
    if (k < n) common.s_hat[k + 1] = common.s_hat[k] + t.grid.dt * common.alpha_hat[k];
  }
}

double exact_b(const EquilibriumTables& t, const CommonPath& common, int k) {
  if (static_cast<int>(common.s_hat.size()) <= k)
    throw std::invalid_argument("exact_b: run forward_common_control first");
  const int m = common.up_count[k], r = common.age[k];
  return t.psibar.at(k, m, r) + (t.phibar.at(k, r) - t.phi.discrete[k]) * common.s_hat[k] -
         t.affine.a[k] * t.geo.q_hat(k, m);
}

std::vector<BEstimate> b_along_path(const CommonPath& common, const EquilibriumTables& t,
                                    const BOptions& options) {
  check_path(common, t);
  const int n = t.grid.n_steps;
  std::vector<BEstimate> out(n + 1);
  for (int k = 0; k < n; ++k) {
    if (options.mode == BMode::Exact)
      out[k] = {exact_b(t, common, k), 0.0};
    else
      out[k] = estimate_b(common, k, t, options.m_inner, options.seed, options.path_index);
  }
  out[n] = {t.params.h1, 0.0};
  return out;
}

namespace {

kernels::PlayerFeedback feedback_at(const EquilibriumTables& t, const CommonPath& common,
                                    int k, double b) {
  kernels::PlayerFeedback f;
  f.a = t.affine.a[k];
  f.b = b;
  f.K = t.params.K;
  f.g_common = common_driver(t, k, common.up_count[k], common.age[k], common.alpha_hat[k]);
  f.phi = t.phi.discrete[k];
  f.inv_ak = 1.0 / (t.params.A + t.params.K);
  return f;
}

void check_b(std::span<const double> b, int n) {
  if (static_cast<int>(b.size()) < n + 1)
    throw std::invalid_argument("player control: b estimates missing (need " +
                                std::to_string(n + 1) + " steps, got " +
                                std::to_string(b.size()) + ")");
}

}  // namespace

void forward_player_control(PlayerPath& player, const CommonPath& common,
                            const EquilibriumTables& t, std::span<const double> b) {
  check_path(common, t);
  const int n = t.grid.n_steps;
  check_b(b, n);
  if (static_cast<int>(common.alpha_hat.size()) != n + 1)
    throw std::invalid_argument("forward_player_control: run forward_common_control first");
  player.psi.assign(n + 1, 0.0);
  player.alpha_star.assign(n + 1, 0.0);
  player.s_star.assign(n + 1, 0.0);
  player.s_star[0] = player.s0;
  for (int k = 0; k <= n; ++k) {
    kernels::PlayerFeedback f = feedback_at(t, common, k, b[k]);
    f.count = 1;
    f.q = &player.q[k];
    f.s = &player.s_star[k];
    f.alpha = &player.alpha_star[k];
    f.psi = &player.psi[k];
    kernels::player_feedback(f);
    if (k < n) player.s_star[k + 1] = player.s_star[k] + t.grid.dt * player.alpha_star[k];
  }
}

std::vector<PlayerPath> nplayer_profile(int n_players, const CommonPath& common,
                                        const EquilibriumTables& t, std::span<const double> b,
                                        std::uint64_t seed, std::uint64_t path_index) {
  if (n_players < 1) throw std::invalid_argument("nplayer_profile: n_players must be >= 1");
  const int n = t.grid.n_steps;
  check_b(b, n);
  std::vector<PlayerPath> players;
  players.reserve(n_players);
  for (int i = 0; i < n_players; ++i)
    players.push_back(simulate_player_path(common, t.params, t.grid, seed, path_index, i));
  std::vector<double> q(n_players), s(n_players), alpha(n_players), psi(n_players);
  for (int i = 0; i < n_players; ++i) {
    auto& p = players[i];
    p.psi.assign(n + 1, 0.0);
    p.alpha_star.assign(n + 1, 0.0);
    p.s_star.assign(n + 1, 0.0);
    p.s_star[0] = p.s0;
  }
  for (int k = 0; k <= n; ++k) {
    for (int i = 0; i < n_players; ++i) {
      q[i] = players[i].q[k];
      s[i] = players[i].s_star[k];
    }
    kernels::PlayerFeedback f = feedback_at(t, common, k, b[k]);
    f.count = n_players;
    f.q = q.data();
    f.s = s.data();
    f.alpha = alpha.data();
    f.psi = psi.data();
    kernels::player_feedback(f);
    for (int i = 0; i < n_players; ++i) {
      auto& p = players[i];
      p.alpha_star[k] = alpha[i];
      p.psi[k] = psi[i];
      if (k < n) p.s_star[k + 1] = p.s_star[k] + t.grid.dt * alpha[i];
    }
  }
  return players;
}

double projected_coupling_residual(const EquilibriumTables& t, const CommonPath& common,
                                   int k) {
  const int m = common.up_count[k], r = common.age[k];
  const double a = common.alpha_hat[k];
  const double q_hat = common.q_hat[k];
  double res = t.params.A * a + t.params.K * (q_hat + a) + t.price.a0 +
               t.price.a_st * common.q_st[k] + t.price.a1 * (q_hat + a) +
               (t.phibar.at(k, r) * common.s_hat[k] + t.psibar.at(k, m, r));
  if (common.J[k])
    res += t.price.f0_eff +
           t.price.f1_eff * (q_hat - common.mean_q[k] + a - t.params.alpha_bar);
  return res;
}

double individual_coupling_residual(const EquilibriumTables& t, const CommonPath& common,
                                    const PlayerPath& player, int k, double b_reference) {
  const double a = player.alpha_star[k];
  const double q = player.q[k];
  const double psi = t.affine.a[k] * q + b_reference;
  return t.params.A * a + t.params.K * (q + a) +
         common_driver(t, k, common.up_count[k], common.age[k], common.alpha_hat[k]) +
         t.phi.discrete[k] * player.s_star[k] + psi;
}

}  // namespace dsm
