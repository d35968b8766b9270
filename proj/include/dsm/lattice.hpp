#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>

namespace dsm {

struct GridSpec {
  int n_steps = 0;
  double dt = 0.0;
  double kappa = 1.0;  // per-step probability of no common jump
  double horizon = 0.0;
};

GridSpec make_grid(double horizon, int n_steps, double lambda0);
void validate_grid(const GridSpec& grid);

// Branch b in 0..3, canonical order (+1,no jump), (-1,no jump), (+1,jump), (-1,jump).
struct BranchIncrement {
  int eps = 1;
  double eta = 0.0;
  bool is_jump = false;
};

constexpr int kBranches = 4;

BranchIncrement branch_increment(int branch, const GridSpec& grid);
std::array<BranchIncrement, kBranches> branch_increments(const GridSpec& grid);
std::array<double, kBranches> branch_weights(const GridSpec& grid);
inline int branch_of(bool up, bool jump) { return (up ? 0 : 1) + (jump ? 2 : 0); }

// Weighted sum grouped as (w0 v0 + w1 v1) + (w2 v2 + w3 v3).
double expect4(const std::array<double, kBranches>& w,
               const std::array<double, kBranches>& v);

struct MartingaleRep {
  double mean = 0.0;
  double z = 0.0;  // Brownian integrand, enters as z * eps / sqrt(n)
  double u = 0.0;  // jump integrand
  double v = 0.0;  // cross integrand on eps * eta
};

MartingaleRep martingale_rep(const std::array<double, kBranches>& values,
                             const GridSpec& grid);
double reconstruct(const MartingaleRep& rep, const BranchIncrement& inc,
                   const GridSpec& grid);

constexpr int kTreeCap = 10;

// Visits every branch sequence of length max_steps with its probability.
// The visitor sees a span of branch codes (0..3).
void enumerate_tree(
    const GridSpec& grid, int max_steps,
    const std::function<void(std::span<const std::uint8_t>, double)>& visit,
    int cap = kTreeCap);

// Jump-age lattice coordinate: kNever or an age in steps since the last jump.
constexpr int kNever = -1;
inline int next_age(int r, bool jump) { return jump ? 0 : (r == kNever ? kNever : r + 1); }
inline int age_slot(int r) { return r + 1; }  // 0 for kNever, age + 1 otherwise
inline int age_from_slot(int slot) { return slot - 1; }

struct CommonStateIndex {
  int k = 0;
  int m = 0;          // number of eps = +1 moves so far
  int r = kNever;
};

// Largest age (in steps) that still counts as activated: age * dt <= theta.
int activation_steps(double theta, double dt);
inline bool activated(int r, int activation) { return r != kNever && r <= activation; }

}  // namespace dsm
