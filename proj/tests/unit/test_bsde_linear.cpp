#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dsm/control.hpp"
#include "dsm/equilibrium.hpp"
#include "oracles.hpp"

using namespace dsm;

namespace {
ModelParams small_params() {
  ModelParams p = reference_params();
  p.T = 3.0;
  p.theta = 1.0;
  p.lambda0 = 0.5;
  p.h1 = 2.0;
  return p;
}

EquilibriumTables solve(const ModelParams& p, int n) {
  return solve_equilibrium(p, make_grid(p.T, n, p.lambda0), make_price_spec(p, Mode::MFG));
}

CommonPath path_of(const EquilibriumTables& t, std::vector<std::uint8_t> branches) {
  branches.resize(t.grid.n_steps, 0);
  CommonPath c = common_path_from_branches(t.params, t.grid, t.geo, branches);
  forward_common_control(c, t);
  return c;
}

ModelParams zero_cost_params() {
  ModelParams p = reference_params();
  p.C = p.K = p.p0 = p.p1 = p.f0 = p.f1 = p.h0 = p.h1 = p.h2 = 0.0;
  return p;
}
}  // namespace

TEST_CASE("psi_bar terminal row and zero driver") {
  const EquilibriumTables t = solve(small_params(), 6);
  for (int m = 0; m <= 6; ++m)
    for (int r = kNever; r <= 6; ++r) CHECK(t.psibar.at(6, m, r) == 2.0);
  const EquilibriumTables z = solve(zero_cost_params(), 24);
  for (double v : z.psibar.values) CHECK(v == 0.0);
}

TEST_CASE("psi_bar without storage or terminal curvature is the terminal constant") {
  ModelParams p = small_params();
  p.C = 0.0;
  p.h2 = 0.0;
  const EquilibriumTables t = solve(p, 6);
  for (double v : t.phibar.values) CHECK(v == 0.0);
  for (double v : t.psibar.values) CHECK(v == 2.0);
}

TEST_CASE("psi_bar matches the full common tree") {
  const EquilibriumTables t = solve(small_params(), 6);
  const auto tree = oracle::common_tree(t);
  for (const auto& [h, v] : tree.psi_bar) {
    const auto node = oracle::node_of(h);
    CHECK(std::abs(t.psibar.at(int(h.size()), node.ups, node.age) - v) <= 1e-10);
  }
  const CommonTree lib = solve_common_tree(t);
  for (int k = 0; k <= 6; ++k)
    for (std::size_t code = 0; code < lib.psi_bar[k].size(); ++code) {
      std::vector<int> h(k);
      for (int i = 0; i < k; ++i) h[i] = int((code >> (2 * (k - 1 - i))) & 3);
      CHECK(std::abs(lib.psi_bar[k][code] - tree.psi_bar.at(h)) <= 1e-10);
      CHECK(std::abs(lib.phi_bar[k][code] - tree.phi_bar.at(h)) <= 1e-10);
    }
}

TEST_CASE("psi_bar is affine in the price intercept") {
  ModelParams p = small_params();
  std::vector<std::vector<double>> runs;
  for (double a0 : {1.0, 4.0, 10.0}) {
    p.p0 = a0;
    runs.push_back(solve(p, 6).psibar.values);
  }
  for (std::size_t i = 0; i < runs[0].size(); ++i) {
    const double slope1 = (runs[1][i] - runs[0][i]) / 3.0, slope2 = (runs[2][i] - runs[1][i]) / 6.0;
    CHECK(std::abs(slope1 - slope2) <= 1e-10 * std::max(1.0, std::abs(runs[2][i])));
  }
}

TEST_CASE("psi_bar depends only on the jump age when the walk drops out") {
  ModelParams p = small_params();
  p.K = 0.0;
  p.p1 = 0.0;
  p.f1 = 0.0;
  p.f0 = 3.0;
  const EquilibriumTables t = solve(p, 6);
  for (int k = 0; k <= 6; ++k)
    for (int r = kNever; r < k; ++r)
      for (int m = 1; m <= k; ++m) CHECK(t.psibar.at(k, m, r) == t.psibar.at(k, 0, r));
}

TEST_CASE("affine coefficient and discount factors") {
  SUBCASE("no demand charge") {
    ModelParams p = small_params();
    p.K = 0.0;
    const EquilibriumTables t = solve(p, 6);
    for (double a : t.affine.a) CHECK(a == 0.0);
  }
  SUBCASE("no storage curvature") {
    ModelParams p = small_params();
    p.C = 0.0;
    p.h2 = 0.0;
    const EquilibriumTables t = solve(p, 6);
    for (double a : t.affine.a) CHECK(a == 0.0);
    for (double g : t.affine.gamma) CHECK(g == 1.0);
  }
  SUBCASE("reference coefficients") {
    const EquilibriumTables t = solve(reference_params(), 96);
    CHECK(t.affine.a.back() == 0.0);
    CHECK(t.affine.gamma.front() == 1.0);
    for (int k = 0; k < 96; ++k) {
      CHECK(std::isfinite(t.affine.a[k]));
      CHECK(t.affine.gamma[k + 1] > 0.0);
      CHECK(t.affine.gamma[k + 1] <= t.affine.gamma[k]);
    }
  }
}

TEST_CASE("affine coefficient equals the q-slope of the full-tree psi") {
  const EquilibriumTables t = solve(small_params(), 5);
  const auto ct = oracle::common_tree(t);
  const auto pt = oracle::player_tree(t, ct);
  const std::vector<int> hc{0, 3, 1}, up{0, 0, 0}, down{1, 1, 1};
  const double slope = (pt.psi.at({hc, up}) - pt.psi.at({hc, down})) /
                       (pt.q.at({hc, up}) - pt.q.at({hc, down}));
  CHECK(slope == doctest::Approx(t.affine.a[3]).epsilon(1e-8));
}

TEST_CASE("nested estimate of b") {
  SUBCASE("no storage curvature gives the terminal value") {
    ModelParams p = small_params();
    p.C = 0.0;
    p.h2 = 0.0;
    const EquilibriumTables t = solve(p, 6);
    const CommonPath c = path_of(t, {0, 2, 1});
    const BEstimate b = estimate_b(c, 2, t, 32, 1, 0);
    CHECK(b.mean == 2.0);
    CHECK(b.std_error == 0.0);
  }
  SUBCASE("deterministic common noise gives the quadrature with no variance") {
    ModelParams p = small_params();
    p.sigma0 = 0.0;
    p.sigma_st = 0.0;
    p.lambda0 = 0.0;
    const EquilibriumTables t = solve(p, 6);
    const CommonPath c = path_of(t, {});
    for (int k = 0; k < 6; ++k) {
      const BEstimate b = estimate_b(c, k, t, 16, 3, 0);
      CHECK(b.std_error <= 1e-12 * std::abs(b.mean));
      CHECK(b.mean == doctest::Approx(enumerate_b(c, k, t)).epsilon(1e-13));
      CHECK(b.mean == doctest::Approx(exact_b(t, c, k)).epsilon(1e-10));
    }
  }
  SUBCASE("random continuations agree with enumeration") {
    const EquilibriumTables t = solve(small_params(), 6);
    const CommonPath c = path_of(t, {1, 0});
    for (int k = 0; k < 3; ++k) {
      const BEstimate b = estimate_b(c, k, t, 4000, 11, 0);
      CHECK(std::abs(b.mean - enumerate_b(c, k, t)) <= 3.0 * b.std_error);
      CHECK(std::abs(enumerate_b(c, k, t) - exact_b(t, c, k)) <= 1e-10);
    }
  }
  SUBCASE("too few inner paths") {
    const EquilibriumTables t = solve(small_params(), 6);
    const CommonPath c = path_of(t, {});
    CHECK_THROWS(estimate_b(c, 0, t, 1, 1, 0));
  }
}

TEST_CASE("full player tree") {
  SUBCASE("matches the reference tree") {
    const EquilibriumTables t = solve(small_params(), 4);
    const auto ct = oracle::common_tree(t);
    const auto pt = oracle::player_tree(t, ct);
    const PlayerTree lib = solve_psi_tree(t);
    for (int k = 0; k <= 4; ++k)
      for (std::size_t code = 0; code < lib.psi[k].size(); ++code) {
        const std::size_t c = code >> k, i = code & ((std::size_t{1} << k) - 1);
        std::vector<int> hc(k), hi(k);
        for (int s = 0; s < k; ++s) {
          hc[s] = int((c >> (2 * (k - 1 - s))) & 3);
          hi[s] = int((i >> (k - 1 - s)) & 1);
        }
        CHECK(std::abs(lib.psi[k][code] - pt.psi.at({hc, hi})) <= 1e-10);
        CHECK(std::abs(lib.q[k][code] - pt.q.at({hc, hi})) <= 1e-13);
      }
  }
  SUBCASE("zero costs") {
    ModelParams p = zero_cost_params();
    p.T = 3.0;
    p.theta = 1.0;
    const PlayerTree lib = solve_psi_tree(solve(p, 4));
    for (const auto& level : lib.psi)
      for (double v : level) CHECK(v == 0.0);
  }
  SUBCASE("cap") {
    ModelParams p = small_params();
    p.T = 5.0;
    CHECK_THROWS(solve_psi_tree(solve(p, 10)));
  }
}
