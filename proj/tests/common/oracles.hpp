#pragma once

// Reference computations written separately from the library code paths. They use
// the same model formulas but none of the lattice indexing, kernels or tables.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "dsm/equilibrium.hpp"

namespace oracle {

// Classical RK4 on the backward Riccati ODE y' = -C + y^2 / D from y(T) = h2.
inline double riccati_rk4(double C, double D, double h2, double time_to_go, int steps) {
  auto f = [&](double y) { return C - y * y / D; };  // derivative in time-to-go
  double y = h2;
  const double h = time_to_go / steps;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2),
                 k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return y;
}

struct Node {
  int ups = 0;
  int age = -1;  // -1: no jump yet
};

inline Node node_of(const std::vector<int>& history) {
  Node n;
  for (int b : history) {
    if ((b & 1) == 0) ++n.ups;
    const bool jump = b >= 2;
    n.age = jump ? 0 : (n.age < 0 ? -1 : n.age + 1);
  }
  return n;
}

struct Model {
  const dsm::EquilibriumTables* t;

  double kappa() const { return t->grid.kappa; }
  double dt() const { return t->grid.dt; }
  int steps() const { return t->grid.n_steps; }
  bool on(const Node& n) const {
    return n.age >= 0 && n.age * dt() <= t->params.theta * (1.0 + 1e-12);
  }
  double q_hat(int k, const Node& n) const {
    const auto& p = t->params;
    const double sd = std::sqrt(dt());
    return p.q0 * std::pow(1.0 + dt() * p.mu + sd * p.sigma0, n.ups) *
           std::pow(1.0 + dt() * p.mu - sd * p.sigma0, k - n.ups);
  }
  double q_st(int k, const Node& n) const {
    const auto& p = t->params;
    const double sd = std::sqrt(dt());
    return p.q0_st * std::pow(1.0 + dt() * p.mu_st + sd * p.sigma_st, n.ups) *
           std::pow(1.0 + dt() * p.mu_st - sd * p.sigma_st, k - n.ups);
  }
  double mean_q(int k) const { return t->params.q0 * std::pow(1.0 + dt() * t->params.mu, k); }
  double weight(int b) const { return b < 2 ? 0.5 * kappa() : 0.5 * (1.0 - kappa()); }
  double big_d(const Node& n) const {
    return t->params.A + t->params.K + t->price.a1 + (on(n) ? t->price.f1_eff : 0.0);
  }
};

// Full non-recombining common tree: phi_bar and psi_bar keyed by branch history.
struct CommonTreeOracle {
  std::map<std::vector<int>, double> phi_bar, psi_bar;
};

inline CommonTreeOracle common_tree(const dsm::EquilibriumTables& t) {
  const Model M{&t};
  CommonTreeOracle out;
  std::vector<int> h;
  std::function<void()> rec = [&] {
    const int k = static_cast<int>(h.size());
    if (k == M.steps()) {
      out.phi_bar[h] = t.params.h2;
      out.psi_bar[h] = t.params.h1;
      return;
    }
    double e_phi = 0.0, e_psi = 0.0;
    for (int b = 0; b < 4; ++b) {
      h.push_back(b);
      rec();
      e_phi += M.weight(b) * out.phi_bar[h];
      e_psi += M.weight(b) * out.psi_bar[h];
      h.pop_back();
    }
    const Node n = node_of(h);
    const double D = M.big_d(n);
    // x = E + dt (C - x E / D), rearranged.
    const double phi = (e_phi + M.dt() * t.params.C) / (1.0 + M.dt() * e_phi / D);
    const double q = M.q_hat(k, n);
    double G = t.price.a0 + t.price.a_st * M.q_st(k, n) + (t.price.a1 + t.params.K) * q;
    if (M.on(n)) G += t.price.f0_eff + t.price.f1_eff * (q - M.mean_q(k) - t.params.alpha_bar);
    // y = E - dt (E_phi / D) (y + G), rearranged.
    const double c = M.dt() * e_phi / D;
    out.phi_bar[h] = phi;
    out.psi_bar[h] = (e_psi - c * G) / (1.0 + c);
  };
  rec();
  return out;
}

// Projected control along a branch history, from the oracle tree.
inline std::vector<double> alpha_hat_along(const dsm::EquilibriumTables& t,
                                           const CommonTreeOracle& tree,
                                           const std::vector<int>& history,
                                           std::vector<double>* s_hat_out = nullptr) {
  const Model M{&t};
  std::vector<double> alpha, s_hat{t.params.s0.mean()};
  std::vector<int> h;
  for (std::size_t k = 0; k <= history.size(); ++k) {
    const Node n = node_of(h);
    const int kk = static_cast<int>(k);
    const double q = M.q_hat(kk, n);
    double H = t.price.a0 + t.price.a_st * M.q_st(kk, n) + (t.price.a1 + t.params.K) * q;
    if (M.on(n)) H += t.price.f0_eff + t.price.f1_eff * (q - M.mean_q(kk) - t.params.alpha_bar);
    const double a = -(H + tree.phi_bar.at(h) * s_hat.back() + tree.psi_bar.at(h)) / M.big_d(n);
    alpha.push_back(a);
    if (k < history.size()) {
      s_hat.push_back(s_hat.back() + M.dt() * a);
      h.push_back(history[k]);
    }
  }
  if (s_hat_out) *s_hat_out = s_hat;
  return alpha;
}

// Individual phi: deterministic recursion with D = A + K.
inline std::vector<double> phi_individual(const dsm::EquilibriumTables& t) {
  const Model M{&t};
  std::vector<double> phi(M.steps() + 1);
  phi[M.steps()] = t.params.h2;
  const double D = t.params.A + t.params.K;
  for (int k = M.steps() - 1; k >= 0; --k) {
    const double e = phi[k + 1];
    phi[k] = (e + M.dt() * t.params.C) / (1.0 + M.dt() * e / D);
  }
  return phi;
}

// Individual psi on the full (common x idiosyncratic) tree, keyed by both histories.
struct PlayerTreeOracle {
  std::map<std::pair<std::vector<int>, std::vector<int>>, double> psi, q;
};

inline PlayerTreeOracle player_tree(const dsm::EquilibriumTables& t, const CommonTreeOracle& ct) {
  const Model M{&t};
  const auto phi = phi_individual(t);
  const auto& p = t.params;
  const double sd = std::sqrt(M.dt());
  PlayerTreeOracle out;
  std::vector<int> hc, hi;
  std::function<void(double)> rec = [&](double q) {
    const int k = static_cast<int>(hc.size());
    out.q[{hc, hi}] = q;
    if (k == M.steps()) {
      out.psi[{hc, hi}] = p.h1;
      return;
    }
    double e = 0.0;
    for (int b = 0; b < 4; ++b)
      for (int e2 = 0; e2 < 2; ++e2) {
        const double eps = (b & 1) ? -1.0 : 1.0, eps2 = e2 ? -1.0 : 1.0;
        const double next = q * (1.0 + M.dt() * p.mu + sd * p.sigma0 * eps + sd * p.sigma * eps2);
        hc.push_back(b);
        hi.push_back(e2);
        rec(next);
        e += 0.5 * M.weight(b) * out.psi[{hc, hi}];
        hc.pop_back();
        hi.pop_back();
      }
    const Node n = node_of(hc);
    const double a_hat = alpha_hat_along(t, ct, hc).back();
    const double qh = M.q_hat(k, n);
    double G = t.price.a0 + t.price.a_st * M.q_st(k, n) + t.price.a1 * (qh + a_hat);
    if (M.on(n))
      G += t.price.f0_eff + t.price.f1_eff * (qh - M.mean_q(k) + a_hat - p.alpha_bar);
    const double c = M.dt() * phi[k + 1] / (p.A + p.K);
    out.psi[{hc, hi}] = (e - c * (p.K * q + G)) / (1.0 + c);
  };
  rec(p.q0);
  return out;
}

}  // namespace oracle
