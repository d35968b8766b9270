#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dsm/costs.hpp"

using namespace dsm;

namespace {
EquilibriumTables solve(const ModelParams& p, int n = kReferenceSteps) {
  return solve_equilibrium(p, make_grid(p.T, n, p.lambda0), make_price_spec(p, Mode::MFG));
}

ModelParams zero_cost_params() {
  ModelParams p = reference_params();
  p.C = p.K = p.p0 = p.p1 = p.f0 = p.f1 = p.h0 = p.h1 = p.h2 = 0.0;
  return p;
}

struct Fixture {
  ModelParams p = zero_cost_params();
  GridSpec g;
  CommonPath common;
  Aggregate agg;
  std::vector<double> q, alpha, s;

  explicit Fixture(int n = 4) {
    p.T = n * 0.5;
    g = make_grid(p.T, n, p.lambda0);
    common = simulate_common_path(p, g, 1);
    q.assign(n + 1, 2.0);
    alpha.assign(n + 1, 1.0);
    s.resize(n + 1);
    for (int k = 0; k <= n; ++k) s[k] = 0.5 * k;
    agg.level.assign(n + 1, 3.0);
    agg.centred.assign(n + 1, 0.25);
  }
  CostBreakdown cost() const { return path_cost(p, g, common, q, alpha, s, agg); }
};
}  // namespace

TEST_CASE("path cost pieces on constant trajectories") {
  Fixture f;
  f.p.A = 4.0;
  f.p.C = 2.0;
  f.p.K = 6.0;
  f.p.h0 = 1.0;
  f.p.h1 = 3.0;
  f.p.h2 = 2.0;
  const CostBreakdown c = f.cost();
  CHECK(c.g == doctest::Approx(4 * 0.5 * 2.0 * 1.0));
  CHECK(c.storage == doctest::Approx(0.5 * 1.0 * (0.0 + 0.25 + 1.0 + 2.25)));
  CHECK(c.l == doctest::Approx(4 * 0.5 * 3.0 * 9.0));
  CHECK(c.c == 0.0);
  CHECK(c.d == 0.0);
  CHECK(c.h == doctest::Approx(1.0 + 3.0 * 2.0 + 0.5 * 2.0 * 4.0));
  CHECK(c.total() == doctest::Approx(c.g + c.storage + c.l + c.h));
}

TEST_CASE("energy bill and divergence penalty") {
  Fixture f;
  f.p.p0 = 5.0;
  f.p.p1 = 2.0;
  f.p.pi = 0.0;
  f.p.f0 = 1.0;
  f.p.f1 = 4.0;
  f.p.alpha_bar = 0.0;
  f.common.J.assign(5, 0);
  f.common.J[1] = f.common.J[3] = 1;
  const CostBreakdown c = f.cost();
  CHECK(c.c == doctest::Approx(4 * 0.5 * 3.0 * (5.0 + 2.0 * 3.0)));
  double expected_d = 0.0;
  for (int k : {1, 3}) expected_d += 0.5 * (3.0 - f.common.mean_q[k]) * (1.0 + 4.0 * 0.25);
  CHECK(c.d == doctest::Approx(expected_d));
}

TEST_CASE("short trajectories are refused") {
  Fixture f;
  f.s.resize(2);
  CHECK_THROWS_AS(f.cost(), std::invalid_argument);
}

TEST_CASE("lazy cost with terminal charges only") {
  ModelParams p = zero_cost_params();
  p.h0 = 3.0;
  p.h2 = 4.0;
  p.s0 = S0Spec{{-1.0, 2.0}, {0.5, 0.5}};
  const EquilibriumTables t = solve(p);
  EvalOptions opt;
  opt.lazy = true;
  opt.seed = 6;
  const CostEstimate j = eval_j_mfg(t, 400, opt);
  const double expected = 3.0 + 0.5 * 4.0 * 2.5;
  CHECK(std::abs(j.mean - expected) <= 3.0 * j.std_error + 1e-12);
  CHECK(j.breakdown.g == 0.0);
  CHECK(j.n_samples == 400);
}

TEST_CASE("estimate mean equals the breakdown total") {
  const EquilibriumTables t = solve(reference_params());
  EvalOptions opt;
  opt.seed = 9;
  const CostEstimate j = eval_j_mfg(t, 20, opt);
  CHECK(j.mean == doctest::Approx(j.breakdown.total()).epsilon(1e-12));
  CHECK(j.std_error > 0.0);
}

TEST_CASE("cost evaluation is deterministic in the seed") {
  const EquilibriumTables t = solve(reference_params());
  EvalOptions opt;
  opt.seed = 13;
  const CostEstimate a = eval_j_mfg(t, 10, opt), b = eval_j_mfg(t, 10, opt);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  opt.seed = 14;
  CHECK(eval_j_mfg(t, 10, opt).mean != a.mean);
  CHECK_THROWS_AS(eval_j_mfg(t, 1, opt), std::invalid_argument);
}

TEST_CASE("central cost without standard consumers is the representative cost") {
  ModelParams p = reference_params();
  p.pi = 0.0;
  const EquilibriumTables t = solve(p);
  EvalOptions opt;
  opt.seed = 3;
  CHECK(eval_j_central(t, 8, 3).mean == eval_j_mfg(t, 8, opt).mean);
}

TEST_CASE("directional derivatives") {
  const EquilibriumTables t = solve(reference_params());
  SUBCASE("zero direction") {
    const GateauxResult r = gateaux_residual(t, Direction{}, 1e-3, 10, 2);
    CHECK(r.value == 0.0);
    CHECK(r.cost_scale > 0.0);
  }
  SUBCASE("level shift is close to stationary") {
    Direction d;
    d.level = 0.3;
    const GateauxResult r = gateaux_residual(t, d, 1e-3, 100, 2);
    CHECK(std::abs(r.value) <= std::max(0.01 * r.cost_scale, 3.0 * r.std_error));
  }
  SUBCASE("bad step") { CHECK_THROWS_AS(gateaux_residual(t, Direction{}, 0.0, 10, 2), std::invalid_argument); }
}

TEST_CASE("direction evaluation") {
  const ModelParams p = reference_params();
  const GridSpec g = make_grid(p.T, 96, p.lambda0);
  CommonPath c = simulate_common_path(p, g, 1);
  const PlayerPath pl = simulate_player_path(c, p, g, 1);
  Direction d;
  d.level = 1.0;
  d.activation = 2.0;
  c.J.assign(97, 0);
  c.J[5] = 1;
  CHECK(d(4, g, c, pl) == 1.0);
  CHECK(d(5, g, c, pl) == 3.0);
  Direction daily;
  daily.daily = 1.0;
  CHECK(daily(12, g, c, pl) == doctest::Approx(1.0));
  Stream s(1, "direction");
  const Direction r = Direction::random(s);
  for (double v : {r.level, r.daily, r.activation, r.demand}) {
    CHECK(v >= -0.5);
    CHECK(v < 0.5);
  }
}

TEST_CASE("Nash gap vanishes without costs") {
  ModelParams p = zero_cost_params();
  const EquilibriumTables t = solve(p);
  const NashGapReport r = nash_gap(5, t, 4, 1);
  CHECK(r.n_players == 5);
  CHECK(r.gap == 0.0);
  CHECK(r.deviation_gain <= 0.0);
}
