#include "dsm/lattice.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsm {

GridSpec make_grid(double horizon, int n_steps, double lambda0) {
  if (n_steps <= 0) throw std::invalid_argument("n_steps must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (!(lambda0 >= 0.0)) throw std::invalid_argument("lambda0 must be nonnegative");
  GridSpec g;
  g.n_steps = n_steps;
  g.horizon = horizon;
  g.dt = horizon / n_steps;
  g.kappa = std::exp(-lambda0 * g.dt);
  return g;
}

void validate_grid(const GridSpec& grid) {
  if (grid.n_steps <= 0 || !(grid.dt > 0.0))
    throw std::invalid_argument("grid: n_steps and dt must be positive");
  if (!(grid.kappa > 0.0 && grid.kappa <= 1.0))
    throw std::invalid_argument("grid: kappa must lie in (0, 1]");
}

BranchIncrement branch_increment(int branch, const GridSpec& grid) {
  BranchIncrement inc;
  inc.eps = (branch & 1) ? -1 : 1;
  inc.is_jump = branch >= 2;
  inc.eta = inc.is_jump ? grid.kappa : grid.kappa - 1.0;
  return inc;
}

std::array<BranchIncrement, kBranches> branch_increments(const GridSpec& grid) {
  std::array<BranchIncrement, kBranches> out;
  for (int b = 0; b < kBranches; ++b) out[b] = branch_increment(b, grid);
  return out;
}

std::array<double, kBranches> branch_weights(const GridSpec& grid) {
  const double stay = 0.5 * grid.kappa;
  const double jump = 0.5 * (1.0 - grid.kappa);
  return {stay, stay, jump, jump};
}

double expect4(const std::array<double, kBranches>& w,
               const std::array<double, kBranches>& v) {
  return (w[0] * v[0] + w[1] * v[1]) + (w[2] * v[2] + w[3] * v[3]);
}

MartingaleRep martingale_rep(const std::array<double, kBranches>& values,
                             const GridSpec& grid) {
  static const char* names[] = {"(+1, no jump)", "(-1, no jump)", "(+1, jump)",
                                "(-1, jump)"};
  for (int b = 0; b < kBranches; ++b)
    if (!std::isfinite(values[b]))
      throw std::invalid_argument(std::string("martingale_rep: non-finite value on branch ") +
                                  names[b]);
  const double kappa = grid.kappa;
  const double stay_mean = 0.5 * (values[0] + values[1]);
  const double jump_mean = 0.5 * (values[2] + values[3]);
  const double stay_half = 0.5 * (values[0] - values[1]);
  const double jump_half = 0.5 * (values[2] - values[3]);
  MartingaleRep rep;
  rep.u = jump_mean - stay_mean;
  rep.mean = stay_mean - rep.u * (kappa - 1.0);
  rep.v = jump_half - stay_half;
  rep.z = (stay_half - rep.v * (kappa - 1.0)) * std::sqrt(static_cast<double>(grid.n_steps));
  return rep;
}

double reconstruct(const MartingaleRep& rep, const BranchIncrement& inc,
                   const GridSpec& grid) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(grid.n_steps));
  return rep.mean + scale * rep.z * inc.eps + rep.u * inc.eta + rep.v * inc.eps * inc.eta;
}

void enumerate_tree(
    const GridSpec& grid, int max_steps,
    const std::function<void(std::span<const std::uint8_t>, double)>& visit, int cap) {
  if (max_steps > cap)
    throw std::invalid_argument("enumerate_tree: max_steps exceeds the cap of " +
                                std::to_string(cap));
  if (max_steps < 0) throw std::invalid_argument("enumerate_tree: negative max_steps");
  const auto w = branch_weights(grid);
  std::vector<std::uint8_t> path(static_cast<std::size_t>(max_steps), 0);
  std::vector<double> prob(static_cast<std::size_t>(max_steps) + 1, 1.0);
  if (max_steps == 0) {
    visit(std::span<const std::uint8_t>(path), 1.0);
    return;
  }
  int depth = 0;
  // Odometer over branch codes, most significant step first.
  for (;;) {
    for (; depth < max_steps; ++depth) prob[depth + 1] = prob[depth] * w[path[depth]];
    visit(std::span<const std::uint8_t>(path), prob[max_steps]);
    int i = max_steps - 1;
    while (i >= 0 && path[i] == kBranches - 1) {
      path[i] = 0;
      --i;
    }
    if (i < 0) break;
    ++path[i];
    depth = i;
  }
}

int activation_steps(double theta, double dt) {
  if (theta < 0.0) return -1;
  return static_cast<int>(std::floor(theta / dt * (1.0 + 1e-12)));
}

}  // namespace dsm
