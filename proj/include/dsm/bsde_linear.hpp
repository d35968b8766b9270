#pragma once

#include <cstdint>
#include <vector>

#include "dsm/dynamics.hpp"
#include "dsm/riccati.hpp"

namespace dsm {

struct EquilibriumTables;

// Value on the (k, m, r) lattice; m is contiguous for fixed (k, r).
struct PsiBarTable {
  int n_steps = 0;
  std::vector<double> values;

  static std::size_t offset(int k) {
    return static_cast<std::size_t>(k) * (k + 1) * (k + 2) / 3;
  }
  std::size_t index(int k, int m, int r) const {
    return offset(k) + static_cast<std::size_t>(age_slot(r)) * (k + 1) + m;
  }
  double at(int k, int m, int r) const { return values[index(k, m, r)]; }
  static std::size_t size_for(int n) { return offset(n + 1); }
};

PsiBarTable solve_psibar(const ModelParams& params, const GridSpec& grid,
                         const PriceSpec& price, const RiccatiTable& phibar);

// Individual adjoint split psi = a q + b.
struct PsiAffine {
  std::vector<double> a;      // a[n] = 0
  std::vector<double> gamma;  // gamma[k] = prod_{i<k} 1 / (1 + dt phi_{i+1} / (A + K))
  int m_inner = 256;
};

std::vector<double> solve_a_coefficient(const ModelParams& params, const GridSpec& grid,
                                        const PhiCurve& phi);
std::vector<double> discount_factors(const ModelParams& params, const GridSpec& grid,
                                     const PhiCurve& phi);

struct BEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Nested Monte Carlo estimate of b at step k of an outer path whose s_hat and
// alpha_hat are filled up to k.
BEstimate estimate_b(const CommonPath& outer, int k, const EquilibriumTables& tables,
                     int m_inner, std::uint64_t seed, std::uint64_t path_index);

// Same target, computed by enumerating every common continuation (tree cap applies).
double enumerate_b(const CommonPath& outer, int k, const EquilibriumTables& tables);

// Exhaustive common-noise tree for the projected pair, without recombination.
struct CommonTree {
  int n_steps = 0;
  // level[k][code]: code is the base-4 branch history, oldest branch most significant.
  std::vector<std::vector<double>> phi_bar, psi_bar;
};

CommonTree solve_common_tree(const EquilibriumTables& tables);

// Full tree over (eps, eps', eta): 8 branches per step.
struct PlayerTree {
  int n_steps = 0;
  // level[k][code]: code = common_code * 2^k + idio_code.
  std::vector<std::vector<double>> psi, q;
};

constexpr int kPlayerTreeCap = 8;

PlayerTree solve_psi_tree(const EquilibriumTables& tables, int cap = kPlayerTreeCap);

}  // namespace dsm
