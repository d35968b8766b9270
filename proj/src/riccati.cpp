#include "dsm/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dsm/error.hpp"

namespace dsm {

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::MFG: return "MFG";
    case Mode::MFC: return "MFC";
    case Mode::MFC_AGG: return "MFC_AGG";
  }
  return "?";
}

Mode parse_mode(const std::string& text) {
  if (text == "MFG") return Mode::MFG;
  if (text == "MFC") return Mode::MFC;
  if (text == "MFC_AGG") return Mode::MFC_AGG;
  throw ConfigError("unknown mode '" + text + "' (expected MFG, MFC or MFC_AGG)");
}

PriceSpec make_price_spec(const ModelParams& params, Mode mode, bool agg_double_f) {
  PriceSpec s;
  s.mode = mode;
  s.a0 = params.p0;
  s.f0_eff = params.f0;
  switch (mode) {
    case Mode::MFG:
      s.a_st = params.pi * params.p1;
      s.a1 = (1.0 - params.pi) * params.p1;
      s.f1_eff = params.f1;
      break;
    case Mode::MFC:
      s.a_st = 2.0 * params.pi * params.p1;
      s.a1 = 2.0 * (1.0 - params.pi) * params.p1;
      s.f1_eff = 2.0 * params.f1;
      break;
    case Mode::MFC_AGG:
      s.a_st = params.pi * params.p1;
      s.a1 = 2.0 * (1.0 - params.pi) * params.p1;
      s.f1_eff = agg_double_f ? 2.0 * params.f1 : params.f1;
      break;
  }
  return s;
}

double riccati_step(double expected_next, double C, double D, double dt) {
  return (expected_next + dt * C) / (1.0 + dt * expected_next / D);
}

double riccati_closed_form(double C, double D, double h2, double time_to_go) {
  if (C == 0.0) {
    if (h2 == 0.0) return 0.0;
    return 1.0 / (1.0 / h2 + time_to_go / D);
  }
  const double s = std::sqrt(C * D);
  const double th = std::tanh(std::sqrt(C / D) * time_to_go);
  return s * (h2 + s * th) / (s + h2 * th);
}

PhiCurve solve_phi_ode(const ModelParams& params, const GridSpec& grid) {
  if (!(params.A + params.K > 0.0)) throw std::invalid_argument("A + K must be positive");
  PhiCurve c;
  c.C = params.C;
  c.D = params.A + params.K;
  c.h2 = params.h2;
  c.T = grid.horizon;
  const int n = grid.n_steps;
  c.closed_form.resize(n + 1);
  c.discrete.resize(n + 1);
  for (int k = 0; k <= n; ++k)
    c.closed_form[k] = riccati_closed_form(c.C, c.D, c.h2, (n - k) * grid.dt);
  c.closed_form[n] = c.h2;
  c.discrete[n] = c.h2;
  for (int k = n - 1; k >= 0; --k)
    c.discrete[k] = riccati_step(c.discrete[k + 1], c.C, c.D, grid.dt);
  return c;
}

namespace {

// Successor slots from (k, slot): without a jump and with a jump.
inline int stay_slot(int slot) { return slot == 0 ? 0 : slot + 1; }
constexpr int kJumpSlot = 1;

RiccatiTable empty_table(const ModelParams& params, const GridSpec& grid,
                         const PriceSpec& price) {
  RiccatiTable t;
  t.n_steps = grid.n_steps;
  t.values.assign(RiccatiTable::size_for(grid.n_steps), 0.0);
  t.denom.resize(t.values.size());
  const int activation = activation_steps(params.theta, grid.dt);
  const double base = params.A + params.K + price.a1;
  for (int k = 0; k <= grid.n_steps; ++k)
    for (int slot = 0; slot <= k + 1; ++slot) {
      const bool on = activated(age_from_slot(slot), activation);
      t.denom[RiccatiTable::offset(k) + slot] = base + (on ? price.f1_eff : 0.0);
    }
  return t;
}

void check_inputs(const ModelParams& params, const GridSpec& grid, const PriceSpec& price) {
  validate_grid(grid);
  if (!(price.a1 >= 0.0 && price.f1_eff >= 0.0))
    throw std::invalid_argument("price spec: a1 and f1_eff must be nonnegative");
  if (!(params.A + params.K > 0.0)) throw std::invalid_argument("A + K must be positive");
}

}  // namespace

RiccatiTable solve_phibar(const ModelParams& params, const GridSpec& grid,
                          const PriceSpec& price, const PhiBarOptions& options) {
  check_inputs(params, grid, price);
  RiccatiTable t = empty_table(params, grid, price);
  const int n = grid.n_steps;
  const double kappa = grid.kappa, dt = grid.dt;
  for (int slot = 0; slot <= n + 1; ++slot) t.values[RiccatiTable::offset(n) + slot] = params.h2;
  for (int k = n - 1; k >= 0; --k) {
    const double* next = &t.values[RiccatiTable::offset(k + 1)];
    for (int slot = 0; slot <= k + 1; ++slot) {
      const std::size_t idx = RiccatiTable::offset(k) + slot;
      const double D = t.denom[idx];
      const double e = kappa * next[stay_slot(slot)] + (1.0 - kappa) * next[kJumpSlot];
      if (options.method == PhiBarMethod::Direct) {
        t.values[idx] = riccati_step(e, params.C, D, dt);
        continue;
      }
      double x = e;
      int it = 0;
      for (; it < options.fp_max_iter; ++it) {
        const double nx = e + dt * (params.C - x * e / D);
        const bool done = std::abs(nx - x) <= options.fp_tol * std::max(1.0, std::abs(nx));
        x = nx;
        if (done) break;
      }
      if (it == options.fp_max_iter)
        throw NumericalRefusal("phi_bar fixed point did not converge within " +
                               std::to_string(options.fp_max_iter) + " iterations at k = " +
                               std::to_string(k));
      t.values[idx] = x;
    }
  }
  return t;
}

PicardResult solve_phibar_picard(const ModelParams& params, const GridSpec& grid,
                                 const PriceSpec& price, double tol, int max_iter) {
  check_inputs(params, grid, price);
  if (!(tol > 0.0)) throw std::invalid_argument("picard: tol must be positive");
  const int n = grid.n_steps;
  const double kappa = grid.kappa, dt = grid.dt;
  PicardResult res;
  RiccatiTable prev = empty_table(params, grid, price);  // X^0 = 0
  RiccatiTable cur = prev;
  for (int m = 1; m <= max_iter; ++m) {
    for (int slot = 0; slot <= n + 1; ++slot)
      cur.values[RiccatiTable::offset(n) + slot] = params.h2;
    for (int k = n - 1; k >= 0; --k) {
      const double* next_prev = &prev.values[RiccatiTable::offset(k + 1)];
      const double* next_cur = &cur.values[RiccatiTable::offset(k + 1)];
      for (int slot = 0; slot <= k + 1; ++slot) {
        const std::size_t idx = RiccatiTable::offset(k) + slot;
        const double D = cur.denom[idx];
        // Tangent linearisation of the product x_k E[x_{k+1}] around the previous
        // iterate; the current iterate solves the resulting linear recursion.
        const double e_prev = kappa * next_prev[stay_slot(slot)] + (1.0 - kappa) * next_prev[kJumpSlot];
        const double e_cur = kappa * next_cur[stay_slot(slot)] + (1.0 - kappa) * next_cur[kJumpSlot];
        const double x_prev = prev.values[idx];
        cur.values[idx] = (e_cur + dt * params.C - dt * x_prev * (e_cur - e_prev) / D) /
                          (1.0 + dt * e_prev / D);
      }
    }
    double sup = 0.0;
    for (std::size_t i = 0; i < cur.values.size(); ++i) {
      const double diff = cur.values[i] - prev.values[i];
      sup = std::max(sup, std::abs(diff));
      if (m >= 2) {
        res.worst_increase = std::max(res.worst_increase, diff);
        if (diff > 1e-12 * std::max(1.0, std::abs(prev.values[i]))) res.monotone = false;
      }
      if (cur.values[i] < 0.0) res.nonnegative = false;
    }
    res.sup_diffs.push_back(sup);
    res.iterations = m;
    if (sup < tol) {
      res.table = cur;
      return res;
    }
    std::swap(prev, cur);
  }
  throw NumericalRefusal("picard iteration reached max_iter = " + std::to_string(max_iter) +
                         " with residual " + std::to_string(res.sup_diffs.back()));
}

double phibar_contraction(const RiccatiTable& table, const ModelParams& params,
                          const GridSpec& grid) {
  (void)params;
  // The fixed-point map x -> E + dt (C - x E / D) contracts with factor dt E / D.
  double worst = 0.0;
  for (int k = 0; k < grid.n_steps; ++k)
    for (int slot = 0; slot <= k + 1; ++slot) {
      const double e = grid.kappa * table.values[RiccatiTable::offset(k + 1) + stay_slot(slot)] +
                       (1.0 - grid.kappa) * table.values[RiccatiTable::offset(k + 1) + kJumpSlot];
      worst = std::max(worst, grid.dt * e / table.denom[RiccatiTable::offset(k) + slot]);
    }
  return worst;
}

}  // namespace dsm
