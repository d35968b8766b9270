#include "dsm/bsde_linear.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "dsm/control.hpp"
#include "dsm/equilibrium.hpp"
#include "dsm/kernels.hpp"
#include "dsm/rng.hpp"

namespace dsm {

namespace {
inline int stay_slot(int slot) { return slot == 0 ? 0 : slot + 1; }
constexpr int kJumpSlot = 1;
}  // namespace

PsiBarTable solve_psibar(const ModelParams& params, const GridSpec& grid,
                         const PriceSpec& price, const RiccatiTable& phibar) {
  if (phibar.n_steps != grid.n_steps)
    throw std::invalid_argument("solve_psibar: phi_bar solved on a different grid");
  const int n = grid.n_steps;
  const Geometry geo(params, grid);
  PsiBarTable t;
  t.n_steps = n;
  t.values.assign(PsiBarTable::size_for(n), 0.0);
  for (std::size_t i = PsiBarTable::offset(n); i < t.values.size(); ++i) t.values[i] = params.h1;

  std::vector<double> q_hat(n + 1), q_st(n + 1);
  kernels::PsiSlice slice;
  slice.w_stay = 0.5 * grid.kappa;
  slice.w_jump = 0.5 * (1.0 - grid.kappa);
  slice.g_st = price.a_st;
  slice.q_hat = q_hat.data();
  slice.q_st = q_st.data();
  for (int k = n - 1; k >= 0; --k) {
    for (int m = 0; m <= k; ++m) {
      q_hat[m] = geo.q_hat(k, m);
      q_st[m] = geo.q_st(k, m);
    }
    slice.count = k + 1;
    const std::size_t next_base = PsiBarTable::offset(k + 1);
    for (int slot = 0; slot <= k + 1; ++slot) {
      const int r = age_from_slot(slot);
      const double D = phibar.denom_at(k, r);
      const double next_phi =
          grid.kappa * phibar.values[RiccatiTable::offset(k + 1) + stay_slot(slot)] +
          (1.0 - grid.kappa) * phibar.values[RiccatiTable::offset(k + 1) + kJumpSlot];
      const double c = grid.dt * next_phi / D;
      const double on = geo.active(r) ? 1.0 : 0.0;
      slice.keep = 1.0 / (1.0 + c);
      slice.dc = c / (1.0 + c);
      slice.g0 = price.a0 + on * (price.f0_eff - price.f1_eff * (geo.mean_q(k) + params.alpha_bar));
      slice.g_q = price.a1 + params.K + on * price.f1_eff;
      slice.stay = &t.values[next_base + static_cast<std::size_t>(stay_slot(slot)) * (k + 2)];
      slice.jump = &t.values[next_base + static_cast<std::size_t>(kJumpSlot) * (k + 2)];
      slice.out = &t.values[t.index(k, 0, r)];
      kernels::psibar_slice(slice);
    }
  }
  return t;
}

std::vector<double> solve_a_coefficient(const ModelParams& params, const GridSpec& grid,
                                        const PhiCurve& phi) {
  const int n = grid.n_steps;
  if (static_cast<int>(phi.discrete.size()) != n + 1)
    throw std::invalid_argument("solve_a_coefficient: phi solved on a different grid");
  std::vector<double> a(n + 1, 0.0);
  const double inv = 1.0 / (params.A + params.K);
  const double growth = 1.0 + grid.dt * params.mu;
  for (int k = n - 1; k >= 0; --k) {
    const double c = grid.dt * phi.discrete[k + 1] * inv;
    a[k] = (growth * a[k + 1] - c * params.K) / (1.0 + c);
  }
  return a;
}

std::vector<double> discount_factors(const ModelParams& params, const GridSpec& grid,
                                     const PhiCurve& phi) {
  const int n = grid.n_steps;
  std::vector<double> g(n + 1, 1.0);
  const double inv = 1.0 / (params.A + params.K);
  for (int k = 0; k < n; ++k) g[k + 1] = g[k] / (1.0 + grid.dt * phi.discrete[k + 1] * inv);
  return g;
}

namespace {

struct ContinuationState {
  int m;
  int r;
  double s_hat;
};

// One step of the b functional: returns the weighted driver and advances the state.
double b_step(const EquilibriumTables& t, int s, ContinuationState& st, double& weight) {
  const double alpha = projected_alpha(t, s, st.m, st.r, st.s_hat);
  const double g = common_driver(t, s, st.m, st.r, alpha);
  const double c = t.grid.dt * t.phi.discrete[s + 1] / (t.params.A + t.params.K);
  weight /= 1.0 + c;
  const double term = -weight * c * g;
  st.s_hat += t.grid.dt * alpha;
  return term;
}

}  // namespace

BEstimate estimate_b(const CommonPath& outer, int k, const EquilibriumTables& tables,
                     int m_inner, std::uint64_t seed, std::uint64_t path_index) {
  if (m_inner < 2) throw std::invalid_argument("estimate_b: m_inner must be at least 2");
  const int n = tables.grid.n_steps;
  if (k < 0 || k > n || static_cast<int>(outer.s_hat.size()) <= k)
    throw std::invalid_argument("estimate_b: outer path lacks s_hat at step k");
  const double jump_prob = 1.0 - tables.grid.kappa;
  double mean = 0.0, m2 = 0.0;
  for (int j = 0; j < m_inner; ++j) {
    Stream stream(seed, "inner", path_index * static_cast<std::uint64_t>(n + 1) + k, j);
    ContinuationState st{outer.up_count[k], outer.age[k], outer.s_hat[k]};
    double weight = 1.0, value = 0.0;
    for (int s = k; s < n; ++s) {
      value += b_step(tables, s, st, weight);
      const std::uint64_t x = stream.next_u64();
      const bool up = (x >> 63) != 0;
      const double u = static_cast<double>(x & ((1ULL << 53) - 1)) * 0x1.0p-53;
      if (up) ++st.m;
      st.r = next_age(st.r, u < jump_prob);
    }
    value += weight * tables.params.h1;
    const double delta = value - mean;
    mean += delta / (j + 1);
    m2 += delta * (value - mean);
  }
  const double var = m2 / (m_inner - 1);
  return {mean, std::sqrt(var / m_inner)};
}

double enumerate_b(const CommonPath& outer, int k, const EquilibriumTables& tables) {
  const int n = tables.grid.n_steps;
  if (n - k > kTreeCap)
    throw std::invalid_argument("enumerate_b: continuation depth exceeds the cap of " +
                                std::to_string(kTreeCap));
  const auto w = branch_weights(tables.grid);
  std::function<double(int, ContinuationState)> rec = [&](int s, ContinuationState st) {
    if (s == n) return tables.params.h1;
    double weight = 1.0;
    const double term = b_step(tables, s, st, weight);
    std::array<double, kBranches> v{};
    for (int b = 0; b < kBranches; ++b) {
      ContinuationState child = st;
      if (b == 0 || b == 2) ++child.m;
      child.r = next_age(st.r, b >= 2);
      v[b] = w[b] > 0.0 ? rec(s + 1, child) : 0.0;
    }
    return term + weight * expect4(w, v);
  };
  return rec(k, ContinuationState{outer.up_count[k], outer.age[k], outer.s_hat[k]});
}

namespace {

struct CommonLevels {
  std::vector<std::vector<int>> m, r;
  std::vector<std::vector<double>> s_hat, alpha_hat;
};

CommonLevels forward_common_levels(const EquilibriumTables& t, int n) {
  CommonLevels L;
  L.m.resize(n + 1);
  L.r.resize(n + 1);
  L.s_hat.resize(n + 1);
  L.alpha_hat.resize(n + 1);
  L.m[0] = {0};
  L.r[0] = {kNever};
  L.s_hat[0] = {t.params.s0.mean()};
  for (int k = 0; k <= n; ++k) {
    const std::size_t count = L.m[k].size();
    L.alpha_hat[k].resize(count);
    for (std::size_t c = 0; c < count; ++c)
      L.alpha_hat[k][c] = projected_alpha(t, k, L.m[k][c], L.r[k][c], L.s_hat[k][c]);
    if (k == n) break;
    L.m[k + 1].resize(count * 4);
    L.r[k + 1].resize(count * 4);
    L.s_hat[k + 1].resize(count * 4);
    for (std::size_t c = 0; c < count; ++c)
      for (int b = 0; b < kBranches; ++b) {
        const std::size_t child = c * 4 + b;
        L.m[k + 1][child] = L.m[k][c] + ((b == 0 || b == 2) ? 1 : 0);
        L.r[k + 1][child] = next_age(L.r[k][c], b >= 2);
        L.s_hat[k + 1][child] = L.s_hat[k][c] + t.grid.dt * L.alpha_hat[k][c];
      }
  }
  return L;
}

}  // namespace

CommonTree solve_common_tree(const EquilibriumTables& t) {
  const int n = t.grid.n_steps;
  if (n > kTreeCap)
    throw std::invalid_argument("solve_common_tree: n_steps exceeds the cap of " +
                                std::to_string(kTreeCap));
  const auto w = branch_weights(t.grid);
  const CommonLevels L = forward_common_levels(t, n);
  CommonTree tree;
  tree.n_steps = n;
  tree.phi_bar.resize(n + 1);
  tree.psi_bar.resize(n + 1);
  tree.phi_bar[n].assign(L.m[n].size(), t.params.h2);
  tree.psi_bar[n].assign(L.m[n].size(), t.params.h1);
  const double base = t.params.A + t.params.K + t.price.a1;
  for (int k = n - 1; k >= 0; --k) {
    const std::size_t count = L.m[k].size();
    tree.phi_bar[k].resize(count);
    tree.psi_bar[k].resize(count);
    for (std::size_t c = 0; c < count; ++c) {
      const int m = L.m[k][c], r = L.r[k][c];
      const bool on = t.geo.active(r);
      const double D = base + (on ? t.price.f1_eff : 0.0);
      std::array<double, kBranches> vp{}, vs{};
      for (int b = 0; b < kBranches; ++b) {
        vp[b] = tree.phi_bar[k + 1][c * 4 + b];
        vs[b] = tree.psi_bar[k + 1][c * 4 + b];
      }
      const double next_phi = expect4(w, vp);
      const double phi = riccati_step(next_phi, t.params.C, D, t.grid.dt);
      const double q_hat = t.geo.q_hat(k, m);
      const double G = t.price.a0 + t.price.a_st * t.geo.q_st(k, m) +
                       (t.price.a1 + t.params.K) * q_hat +
                       (on ? t.price.f0_eff + t.price.f1_eff * (q_hat - t.geo.mean_q(k) -
                                                                t.params.alpha_bar)
                           : 0.0);
      const double dc = t.grid.dt * next_phi / D;
      tree.phi_bar[k][c] = phi;
      tree.psi_bar[k][c] = (expect4(w, vs) - dc * G) / (1.0 + dc);
    }
  }
  return tree;
}

PlayerTree solve_psi_tree(const EquilibriumTables& t, int cap) {
  const int n = t.grid.n_steps;
  if (n > cap)
    throw std::invalid_argument("solve_psi_tree: n_steps exceeds the cap of " +
                                std::to_string(cap));
  const auto w = branch_weights(t.grid);
  const CommonLevels L = forward_common_levels(t, n);
  const ModelParams& p = t.params;
  const double sd = std::sqrt(t.grid.dt);
  PlayerTree tree;
  tree.n_steps = n;
  tree.q.resize(n + 1);
  tree.psi.resize(n + 1);
  tree.q[0] = {p.q0};
  for (int k = 0; k < n; ++k) {
    const std::size_t idio_count = std::size_t{1} << k;
    tree.q[k + 1].resize(tree.q[k].size() * 8);
    for (std::size_t node = 0; node < tree.q[k].size(); ++node) {
      const std::size_t c = node / idio_count, i = node % idio_count;
      for (int b = 0; b < kBranches; ++b) {
        const int eps = (b & 1) ? -1 : 1;
        const double growth = (1.0 + t.grid.dt * p.mu) + sd * p.sigma0 * eps;
        for (int e = 0; e < 2; ++e) {
          const std::size_t child = ((c * 4 + b) << (k + 1)) + (i * 2 + e);
          tree.q[k + 1][child] = tree.q[k][node] * (growth + sd * p.sigma * (e ? -1 : 1));
        }
      }
    }
  }
  tree.psi[n].assign(tree.q[n].size(), p.h1);
  const double inv = 1.0 / (p.A + p.K);
  for (int k = n - 1; k >= 0; --k) {
    const std::size_t idio_count = std::size_t{1} << k;
    const double dc = t.grid.dt * t.phi.discrete[k + 1] * inv;
    tree.psi[k].resize(tree.q[k].size());
    for (std::size_t node = 0; node < tree.q[k].size(); ++node) {
      const std::size_t c = node / idio_count, i = node % idio_count;
      const double gf = common_driver(t, k, L.m[k][c], L.r[k][c], L.alpha_hat[k][c]);
      std::array<double, kBranches> v{};
      for (int b = 0; b < kBranches; ++b) {
        const std::size_t base = ((c * 4 + b) << (k + 1)) + i * 2;
        v[b] = 0.5 * tree.psi[k + 1][base] + 0.5 * tree.psi[k + 1][base + 1];
      }
      tree.psi[k][node] = (expect4(w, v) - dc * (p.K * tree.q[k][node] + gf)) / (1.0 + dc);
    }
  }
  return tree;
}

}  // namespace dsm
