#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dsm/error.hpp"
#include "dsm/riccati.hpp"
#include "oracles.hpp"

using namespace dsm;

namespace {
struct Setup {
  ModelParams p = reference_params();
  GridSpec g;
  PriceSpec price;
  void finish(int n = kReferenceSteps, Mode mode = Mode::MFG) {
    g = make_grid(p.T, n, p.lambda0);
    price = make_price_spec(p, mode);
  }
};

double expected_successor(const RiccatiTable& t, const GridSpec& g, int k, int slot) {
  const int stay = slot == 0 ? 0 : slot + 1;
  return g.kappa * t.values[RiccatiTable::offset(k + 1) + stay] +
         (1.0 - g.kappa) * t.values[RiccatiTable::offset(k + 1) + 1];
}
}  // namespace

TEST_CASE("price rules per mode") {
  ModelParams p = reference_params();
  const PriceSpec mfg = make_price_spec(p, Mode::MFG);
  CHECK(mfg.a0 == p.p0);
  CHECK(mfg.a_st == p.pi * p.p1);
  CHECK(mfg.a1 == (1 - p.pi) * p.p1);
  CHECK(mfg.f1_eff == p.f1);
  const PriceSpec mfc = make_price_spec(p, Mode::MFC);
  CHECK(mfc.a_st == 2 * p.pi * p.p1);
  CHECK(mfc.a1 == 2 * (1 - p.pi) * p.p1);
  CHECK(mfc.f1_eff == 2 * p.f1);
  const PriceSpec agg = make_price_spec(p, Mode::MFC_AGG);
  CHECK(agg.a_st == p.pi * p.p1);
  CHECK(agg.a1 == 2 * (1 - p.pi) * p.p1);
  CHECK(agg.f1_eff == 2 * p.f1);
  CHECK(make_price_spec(p, Mode::MFC_AGG, false).f1_eff == p.f1);
  CHECK(parse_mode("MFC_AGG") == Mode::MFC_AGG);
  CHECK_THROWS_AS(parse_mode("mfc"), ConfigError);
}

TEST_CASE("closed-form Riccati solution") {
  SUBCASE("zero is a fixed point") { CHECK(riccati_closed_form(0, 200, 0, 5.0) == 0.0); }
  SUBCASE("separable case") { CHECK(riccati_closed_form(0, 200, 200, 1.0) == doctest::Approx(100.0)); }
  SUBCASE("agrees with a fine-grid integrator") {
    for (double tau : {0.0, 0.3, 2.0, 11.0, 48.0}) {
      const double rk = oracle::riccati_rk4(80, 200, 100, tau, 20000);
      CHECK(riccati_closed_form(80, 200, 100, tau) == doctest::Approx(rk).epsilon(1e-10));
    }
  }
}

TEST_CASE("individual phi on the reference coefficients") {
  const ModelParams p = reference_params();
  const GridSpec g = make_grid(p.T, 96, p.lambda0);
  const PhiCurve c = solve_phi_ode(p, g);
  CHECK(c.closed_form.back() == p.h2);
  CHECK(c.discrete.back() == p.h2);
  CHECK(c.closed_form[0] > 100.0);
  CHECK(c.closed_form[0] < 126.4912);
  for (int k = 0; k < 96; ++k) {
    CHECK(c.closed_form[k] >= c.closed_form[k + 1]);
    CHECK(c.discrete[k] >= c.discrete[k + 1]);
    CHECK(std::abs(c.discrete[k] / c.closed_form[k] - 1.0) <= 0.01);
  }
}

TEST_CASE("individual phi vanishes without storage and terminal cost") {
  ModelParams p = reference_params();
  p.C = 0;
  p.h2 = 0;
  const PhiCurve c = solve_phi_ode(p, make_grid(p.T, 96, p.lambda0));
  for (double v : c.discrete) CHECK(v == 0.0);
  for (double v : c.closed_form) CHECK(v == 0.0);
}

TEST_CASE("phi_bar terminal row, boundedness and tower property") {
  Setup s;
  s.finish();
  const RiccatiTable t = solve_phibar(s.p, s.g, s.price);
  const int n = s.g.n_steps;
  double d_max = 0.0;
  for (double d : t.denom) d_max = std::max(d_max, d);
  const double bound = std::max(s.p.h2, std::sqrt(s.p.C * d_max));
  for (int slot = 0; slot <= n + 1; ++slot) CHECK(t.values[RiccatiTable::offset(n) + slot] == s.p.h2);
  for (double v : t.values) {
    CHECK(v >= 0.0);
    CHECK(v <= bound * (1 + 1e-14));
  }
  for (int k = 0; k < n; ++k)
    for (int slot = 0; slot <= k + 1; ++slot) {
      const std::size_t idx = RiccatiTable::offset(k) + slot;
      const double e = expected_successor(t, s.g, k, slot);
      const double x = t.values[idx];
      CHECK(std::abs(x - (e + s.g.dt * (s.p.C - x * e / t.denom[idx]))) <= 1e-12 * x);
    }
}

TEST_CASE("phi_bar without the divergence penalty ignores the jump age") {
  Setup s;
  s.p.f1 = 0.0;
  s.finish();
  const RiccatiTable t = solve_phibar(s.p, s.g, s.price);
  for (int k = 0; k <= s.g.n_steps; ++k)
    for (int slot = 0; slot <= std::min(k + 1, s.g.n_steps + 1); ++slot)
      CHECK(t.values[RiccatiTable::offset(k) + slot] == t.values[RiccatiTable::offset(k)]);
}

TEST_CASE("phi_bar without jumps is the deterministic recursion") {
  Setup s;
  s.p.lambda0 = 0.0;
  s.finish();
  const RiccatiTable t = solve_phibar(s.p, s.g, s.price);
  const double D = s.p.A + s.p.K + s.price.a1;
  double x = s.p.h2;
  for (int k = s.g.n_steps - 1; k >= 0; --k) {
    x = riccati_step(x, s.p.C, D, s.g.dt);
    CHECK(t.at(k, kNever) == doctest::Approx(x).epsilon(1e-14));
  }
}

TEST_CASE("phi_bar comparison in the storage weight and the denominator") {
  Setup base;
  base.finish();
  const RiccatiTable t0 = solve_phibar(base.p, base.g, base.price);
  Setup more_storage = base;
  more_storage.p.C = 90.0;
  more_storage.finish();
  const RiccatiTable t1 = solve_phibar(more_storage.p, more_storage.g, more_storage.price);
  Setup more_penalty = base;
  more_penalty.p.f1 = 2e4;
  more_penalty.finish();
  const RiccatiTable t2 = solve_phibar(more_penalty.p, more_penalty.g, more_penalty.price);
  for (std::size_t i = 0; i < t0.values.size(); ++i) {
    CHECK(t1.values[i] >= t0.values[i]);
    CHECK(t2.values[i] >= t0.values[i]);
    if (t2.denom[i] > t0.denom[i])
      CHECK(t2.values[i] / t2.denom[i] <= t0.values[i] / t0.denom[i] * (1 + 1e-14));
  }
}

TEST_CASE("fixed-point mode reproduces the direct solve") {
  Setup s;
  s.finish();
  const RiccatiTable direct = solve_phibar(s.p, s.g, s.price);
  PhiBarOptions opt;
  opt.method = PhiBarMethod::FixedPoint;
  const RiccatiTable fp = solve_phibar(s.p, s.g, s.price, opt);
  for (std::size_t i = 0; i < direct.values.size(); ++i)
    CHECK(std::abs(direct.values[i] - fp.values[i]) <= 1e-10 * direct.values[i]);
  const double contraction = phibar_contraction(direct, s.p, s.g);
  CHECK(contraction > 0.0);
  CHECK(contraction < 1.0);
  opt.fp_max_iter = 1;
  CHECK_THROWS_AS(solve_phibar(s.p, s.g, s.price, opt), NumericalRefusal);
}

TEST_CASE("picard iteration") {
  SUBCASE("zero problem converges at once") {
    Setup s;
    s.p.C = 0;
    s.p.h2 = 0;
    s.finish(24);
    const PicardResult r = solve_phibar_picard(s.p, s.g, s.price, 1e-12, 10);
    CHECK(r.iterations == 1);
    for (double v : r.table.values) CHECK(v == 0.0);
  }
  SUBCASE("iterates decrease to the direct solution") {
    Setup s;
    s.finish(48);
    const PicardResult r = solve_phibar_picard(s.p, s.g, s.price, 1e-10, 200);
    CHECK(r.monotone);
    CHECK(r.nonnegative);
    const RiccatiTable direct = solve_phibar(s.p, s.g, s.price);
    for (std::size_t i = 0; i < direct.values.size(); ++i)
      CHECK(std::abs(direct.values[i] - r.table.values[i]) <= 1e-8);
  }
  SUBCASE("iteration cap") {
    Setup s;
    s.finish(24);
    CHECK_THROWS_AS(solve_phibar_picard(s.p, s.g, s.price, 1e-14, 2), NumericalRefusal);
  }
}

TEST_CASE("grid refinement of phi_bar against the closed form") {
  Setup s;
  s.p.f1 = 0.0;
  auto worst_error = [&](int n) {
    s.finish(n);
    const RiccatiTable t = solve_phibar(s.p, s.g, s.price);
    double worst = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double exact =
          riccati_closed_form(s.p.C, s.p.A + s.p.K + s.price.a1, s.p.h2, s.p.T - k * s.g.dt);
      worst = std::max(worst, std::abs(t.at(k, kNever) - exact));
    }
    return worst;
  };
  const double e1 = worst_error(48), e2 = worst_error(96), e3 = worst_error(192);
  CHECK(e2 < e1);
  CHECK(e3 < e2);
}
