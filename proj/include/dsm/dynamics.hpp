#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dsm/lattice.hpp"

namespace dsm {

// Initial accumulated deviation: a finite distribution (one atom for a constant).
struct S0Spec {
  std::vector<double> values{0.0};
  std::vector<double> weights{1.0};

  static S0Spec constant(double v) { return S0Spec{{v}, {1.0}}; }
  double mean() const;
  double second_moment() const;
  void validate() const;
};

struct ModelParams {
  double A = 150.0;   // control effort weight
  double C = 80.0;    // storage weight
  double K = 50.0;    // demand charge weight
  double p0 = 6.16;   // price intercept
  double p1 = 0.65;   // price slope
  double f0 = 0.0;    // divergence penalty intercept
  double f1 = 1e4;    // divergence penalty slope
  double h0 = 0.0;
  double h1 = 0.0;
  double h2 = 100.0;
  double alpha_bar = 0.1;  // kW
  double theta = 3.0;      // hours
  double pi = 0.5;         // share of standard consumers
  double mu = 0.0;         // 1/hour
  double mu_st = 0.0;
  double sigma = 0.56;     // 1/sqrt(hour)
  double sigma0 = 0.31;
  double sigma_st = 0.31;
  double lambda0 = 2.0 / 24.0;  // 1/hour
  double lambda = 0.0;          // idiosyncratic jumps, carried but unused
  double T = 48.0;              // hours
  double q0 = 1.0;              // kW
  double q0_st = 1.0;           // kW
  S0Spec s0 = S0Spec::constant(-0.5);

  void validate() const;  // throws ConfigError
};

// Two-day demand-side-management experiment at half-hour resolution.
ModelParams reference_params();
constexpr int kReferenceSteps = 96;

double jump_age_update(double r_prev, bool is_jump, const GridSpec& grid);

// Walk values on the recombining lattice: q_hat(k, m), q_st(k, m), E[Q] at k.
class Geometry {
 public:
  Geometry() = default;
  Geometry(const ModelParams& params, const GridSpec& grid);

  double q_hat(int k, int m) const { return q0_ * up_[m] * down_[k - m]; }
  double q_st(int k, int m) const { return q0_st_ * up_st_[m] * down_st_[k - m]; }
  double mean_q(int k) const { return mean_q_[k]; }
  const std::vector<double>& mean_q() const { return mean_q_; }
  double jump_age_hours(int k, int r) const;
  bool active(int r) const { return activated(r, activation_); }
  int activation() const { return activation_; }

 private:
  double q0_ = 0.0, q0_st_ = 0.0;
  double theta_ = 0.0, dt_ = 0.0;
  int activation_ = -1;
  std::vector<double> up_, down_, up_st_, down_st_, mean_q_;
};

struct CommonPath {
  std::vector<BranchIncrement> increments;  // increments[k] moves k -> k+1
  std::vector<std::uint8_t> branches;
  std::vector<int> up_count;   // lattice m at each k
  std::vector<int> age;        // lattice r at each k (kNever before the first jump)
  std::vector<double> q_hat, q_st, R, mean_q;
  std::vector<std::uint8_t> J;
  // Filled by the control module.
  std::vector<double> s_hat, alpha_hat, phi_bar, psi_bar;

  int n_steps() const { return static_cast<int>(branches.size()); }
};

struct PlayerPath {
  std::vector<int> idio;  // idio[k] moves k -> k+1
  std::vector<double> q;
  double s0 = 0.0;
  // Filled by the control module.
  std::vector<double> psi, alpha_star, s_star;
};

void check_walk_refinement(const ModelParams& params, const GridSpec& grid);

CommonPath common_path_from_branches(const ModelParams& params, const GridSpec& grid,
                                     const Geometry& geo,
                                     std::span<const std::uint8_t> branches);
CommonPath simulate_common_path(const ModelParams& params, const GridSpec& grid,
                                std::uint64_t seed, std::uint64_t path_index = 0);

PlayerPath player_path_from_signs(const CommonPath& common, const ModelParams& params,
                                  const GridSpec& grid, std::span<const int> idio,
                                  double s0);
PlayerPath simulate_player_path(const CommonPath& common, const ModelParams& params,
                                const GridSpec& grid, std::uint64_t seed,
                                std::uint64_t path_index = 0,
                                std::uint64_t player_index = 0);

double draw_s0(const S0Spec& s0, double u);

}  // namespace dsm
