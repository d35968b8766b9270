#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dsm/bsde_linear.hpp"
#include "dsm/equilibrium.hpp"

namespace dsm {

// Projected feedback at a lattice node given the projected storage level.
double projected_alpha(const EquilibriumTables& tables, int k, int m, int r,
                       double s_hat);

// Common-noise part of the individual driver (everything except K q and the adjoint).
double common_driver(const EquilibriumTables& tables, int k, int m, int r,
                     double alpha_hat);

// Fills s_hat, alpha_hat, phi_bar, psi_bar along the path.
void forward_common_control(CommonPath& common, const EquilibriumTables& tables);

// Exact b at step k, from the projection identity on the lattice.
double exact_b(const EquilibriumTables& tables, const CommonPath& common, int k);

enum class BMode { Exact, NestedMC };

struct BOptions {
  BMode mode = BMode::Exact;
  int m_inner = 256;
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
};

// b at steps 0..n-1 (standard errors are zero in exact mode).
std::vector<BEstimate> b_along_path(const CommonPath& common,
                                    const EquilibriumTables& tables,
                                    const BOptions& options);

void forward_player_control(PlayerPath& player, const CommonPath& common,
                            const EquilibriumTables& tables, std::span<const double> b);

// n players sharing one common path; players are exchangeable.
std::vector<PlayerPath> nplayer_profile(int n_players, const CommonPath& common,
                                        const EquilibriumTables& tables,
                                        std::span<const double> b, std::uint64_t seed,
                                        std::uint64_t path_index);

double projected_coupling_residual(const EquilibriumTables& tables,
                                   const CommonPath& common, int k);
double individual_coupling_residual(const EquilibriumTables& tables,
                                    const CommonPath& common, const PlayerPath& player,
                                    int k, double b_reference);

}  // namespace dsm
