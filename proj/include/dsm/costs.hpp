#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dsm/control.hpp"
#include "dsm/rng.hpp"

namespace dsm {

struct CostBreakdown {
  double g = 0.0;        // A/2 alpha^2
  double storage = 0.0;  // C/2 S^2
  double l = 0.0;        // K/2 (q + alpha)^2
  double c = 0.0;        // energy bill
  double d = 0.0;        // divergence penalty
  double h = 0.0;        // terminal
  double total() const { return g + storage + l + c + d + h; }
};

struct CostEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  CostBreakdown breakdown;
};

// Population quantities that enter the price and the divergence penalty:
// level[k] is the aggregate consumption q + alpha, centred[k] its deseasonalised value.
struct Aggregate {
  std::vector<double> level;
  std::vector<double> centred;
};

Aggregate projected_aggregate(const CommonPath& common);

// Left Riemann sum of the running cost plus the terminal cost, always priced with
// the original (p0, p1, f0, f1). s has n+1 entries.
CostBreakdown path_cost(const ModelParams& params, const GridSpec& grid,
                        const CommonPath& common, std::span<const double> q,
                        std::span<const double> alpha, std::span<const double> s,
                        const Aggregate& agg);

// Bounded perturbation driven by exogenous path state.
struct Direction {
  double level = 0.0;
  double daily = 0.0;
  double phase = 0.0;
  double activation = 0.0;
  double demand = 0.0;

  double operator()(int k, const GridSpec& grid, const CommonPath& common,
                    const PlayerPath& player) const;
  static Direction random(Stream& stream);
};

CostEstimate summarize(std::span<const double> totals,
                       std::span<const CostBreakdown> parts);

struct EvalOptions {
  const Direction* beta = nullptr;  // control = alpha* + step * beta
  double step = 0.0;
  bool lazy = false;                // control = 0
  std::uint64_t seed = 0;
};

// Representative-player cost against the projected population.
CostEstimate eval_j_mfg(const EquilibriumTables& tables, int n_paths,
                        const EvalOptions& options);

// Central-planner objective with the original pricing rules.
CostEstimate eval_j_central(const EquilibriumTables& tables, int n_paths,
                            std::uint64_t seed);

struct GateauxResult {
  double value = 0.0;
  double std_error = 0.0;
  double cost_scale = 0.0;  // |J(alpha*)|
};

GateauxResult gateaux_residual(const EquilibriumTables& tables, const Direction& beta,
                               double eps_step, int n_paths, std::uint64_t seed);

struct NashGapReport {
  int n_players = 0;
  CostEstimate j_n_i;    // player 1 in the n-player game
  CostEstimate j_mfg;    // same player against the projected population
  double gap = 0.0;      // |E[j_n_i - j_mfg]| over the exchangeable average
  double gap_std_error = 0.0;
  double deviation_gain = 0.0;  // best improvement over the deviation family
  double deviation_std_error = 0.0;
};

NashGapReport nash_gap(int n_players, const EquilibriumTables& tables, int n_mc,
                       std::uint64_t seed);

}  // namespace dsm
