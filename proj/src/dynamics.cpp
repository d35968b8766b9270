#include "dsm/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dsm/error.hpp"
#include "dsm/rng.hpp"

namespace dsm {

double S0Spec::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) m += weights[i] * values[i];
  return m;
}

double S0Spec::second_moment() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) m += weights[i] * values[i] * values[i];
  return m;
}

void S0Spec::validate() const {
  if (values.empty() || values.size() != weights.size())
    throw ConfigError("s0: values and weights must be non-empty and of equal length");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ConfigError("s0: weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("s0: weights must sum to 1");
  for (double v : values)
    if (!std::isfinite(v)) throw ConfigError("s0: values must be finite");
}

namespace {
void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("model parameter constraint violated: ") + what);
}
}  // namespace

void ModelParams::validate() const {
  const double all[] = {A, C, K, p0, p1, f0, f1, h0, h1, h2, alpha_bar, theta, pi,
                        mu, mu_st, sigma, sigma0, sigma_st, lambda0, lambda, T, q0, q0_st};
  for (double x : all) require(std::isfinite(x), "all coefficients finite");
  require(A > 0.0, "A > 0");
  require(C >= 0.0, "C >= 0");
  require(K >= 0.0, "K >= 0");
  require(p1 >= 0.0, "p1 >= 0");
  require(f0 >= 0.0, "f0 >= 0");
  require(f1 >= 0.0, "f1 >= 0");
  require(h0 >= 0.0 && h1 >= 0.0 && h2 >= 0.0, "h0, h1, h2 >= 0");
  require(theta >= 0.0, "theta >= 0");
  require(T > 0.0, "T > 0");
  require(theta < T, "theta < T");
  require(pi >= 0.0 && pi <= 1.0, "pi in [0, 1]");
  require(sigma >= 0.0 && sigma0 >= 0.0 && sigma_st >= 0.0, "volatilities >= 0");
  require(lambda0 >= 0.0 && lambda >= 0.0, "jump intensities >= 0");
  s0.validate();
}

ModelParams reference_params() { return ModelParams{}; }

double jump_age_update(double r_prev, bool is_jump, const GridSpec& grid) {
  if (!(r_prev >= 0.0)) throw std::invalid_argument("jump_age_update: negative age");
  return is_jump ? 0.0 : r_prev + grid.dt;
}

namespace {
std::vector<double> powers(double base, int n) {
  std::vector<double> p(static_cast<std::size_t>(n) + 1, 1.0);
  for (int i = 1; i <= n; ++i) p[i] = p[i - 1] * base;
  return p;
}
}  // namespace

Geometry::Geometry(const ModelParams& params, const GridSpec& grid)
    : q0_(params.q0),
      q0_st_(params.q0_st),
      theta_(params.theta),
      dt_(grid.dt),
      activation_(activation_steps(params.theta, grid.dt)) {
  const double sd = std::sqrt(grid.dt);
  const int n = grid.n_steps;
  up_ = powers(1.0 + grid.dt * params.mu + sd * params.sigma0, n);
  down_ = powers(1.0 + grid.dt * params.mu - sd * params.sigma0, n);
  up_st_ = powers(1.0 + grid.dt * params.mu_st + sd * params.sigma_st, n);
  down_st_ = powers(1.0 + grid.dt * params.mu_st - sd * params.sigma_st, n);
  const auto growth = powers(1.0 + grid.dt * params.mu, n);
  mean_q_.resize(growth.size());
  for (std::size_t k = 0; k < growth.size(); ++k) mean_q_[k] = params.q0 * growth[k];
}

double Geometry::jump_age_hours(int k, int r) const {
  return r == kNever ? 2.0 * theta_ + k * dt_ : r * dt_;
}

void check_walk_refinement(const ModelParams& params, const GridSpec& grid) {
  const double sd = std::sqrt(grid.dt);
  const double worst = std::min(1.0 + grid.dt * params.mu - sd * params.sigma0,
                                1.0 + grid.dt * params.mu_st - sd * params.sigma_st);
  if (!(worst > 0.0))
    throw NumericalRefusal(
        "multiplicative walk can reach zero: 1 + dt mu - sqrt(dt) sigma <= 0; refine the grid "
        "(n_steps = " + std::to_string(grid.n_steps) + ")");
}

CommonPath common_path_from_branches(const ModelParams& params, const GridSpec& grid,
                                     const Geometry& geo,
                                     std::span<const std::uint8_t> branches) {
  const int n = static_cast<int>(branches.size());
  if (n > grid.n_steps) throw std::invalid_argument("path longer than the grid");
  CommonPath p;
  p.branches.assign(branches.begin(), branches.end());
  p.increments.resize(n);
  p.up_count.resize(n + 1);
  p.age.resize(n + 1);
  p.q_hat.resize(n + 1);
  p.q_st.resize(n + 1);
  p.R.resize(n + 1);
  p.J.resize(n + 1);
  p.mean_q.resize(n + 1);
  int m = 0, r = kNever;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) {
      const BranchIncrement inc = branch_increment(branches[k - 1], grid);
      p.increments[k - 1] = inc;
      if (inc.eps > 0) ++m;
      r = next_age(r, inc.is_jump);
    }
    p.up_count[k] = m;
    p.age[k] = r;
    p.q_hat[k] = geo.q_hat(k, m);
    p.q_st[k] = geo.q_st(k, m);
    p.R[k] = geo.jump_age_hours(k, r);
    p.J[k] = geo.active(r) ? 1 : 0;
    p.mean_q[k] = geo.mean_q(k);
  }
  (void)params;
  return p;
}

CommonPath simulate_common_path(const ModelParams& params, const GridSpec& grid,
                                std::uint64_t seed, std::uint64_t path_index) {
  validate_grid(grid);
  check_walk_refinement(params, grid);
  Stream stream(seed, "common", path_index);
  std::vector<std::uint8_t> branches(static_cast<std::size_t>(grid.n_steps));
  const double jump_prob = 1.0 - grid.kappa;
  for (auto& b : branches) {
    const std::uint64_t x = stream.next_u64();
    const bool up = (x >> 63) != 0;
    const double u = static_cast<double>(x & ((1ULL << 53) - 1)) * 0x1.0p-53;
    b = static_cast<std::uint8_t>(branch_of(up, u < jump_prob));
  }
  return common_path_from_branches(params, grid, Geometry(params, grid), branches);
}

double draw_s0(const S0Spec& s0, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < s0.values.size(); ++i) {
    acc += s0.weights[i];
    if (u < acc) return s0.values[i];
  }
  return s0.values.back();
}

PlayerPath player_path_from_signs(const CommonPath& common, const ModelParams& params,
                                  const GridSpec& grid, std::span<const int> idio,
                                  double s0) {
  const int n = common.n_steps();
  if (static_cast<int>(idio.size()) != n || n > grid.n_steps)
    throw std::invalid_argument("player path: grid mismatch with the common path");
  const double sd = std::sqrt(grid.dt);
  if (!(1.0 + grid.dt * params.mu - sd * (params.sigma + params.sigma0) > 0.0))
    throw NumericalRefusal(
        "individual walk can reach zero: 1 + dt mu - sqrt(dt)(sigma + sigma0) <= 0; refine "
        "the grid");
  PlayerPath p;
  p.idio.assign(idio.begin(), idio.end());
  p.s0 = s0;
  p.q.resize(n + 1);
  p.q[0] = params.q0;
  const double vol = sd * params.sigma;
  for (int k = 0; k < n; ++k) {
    const double growth =
        (1.0 + grid.dt * params.mu) + sd * params.sigma0 * common.increments[k].eps;
    p.q[k + 1] = p.q[k] * (growth + vol * p.idio[k]);
  }
  return p;
}

PlayerPath simulate_player_path(const CommonPath& common, const ModelParams& params,
                                const GridSpec& grid, std::uint64_t seed,
                                std::uint64_t path_index, std::uint64_t player_index) {
  if (common.n_steps() != grid.n_steps)
    throw std::invalid_argument("simulate_player_path: grid mismatch with the common path");
  Stream stream(seed, "player", path_index, player_index);
  const double s0 = draw_s0(params.s0, stream.uniform());
  std::vector<int> idio(static_cast<std::size_t>(grid.n_steps));
  for (auto& e : idio) e = stream.sign();
  return player_path_from_signs(common, params, grid, idio, s0);
}

}  // namespace dsm
