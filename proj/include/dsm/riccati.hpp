#pragma once

#include <string>
#include <vector>

#include "dsm/dynamics.hpp"
#include "dsm/lattice.hpp"

namespace dsm {

enum class Mode { MFG, MFC, MFC_AGG };

const char* mode_name(Mode mode);
Mode parse_mode(const std::string& text);

// Coefficients of the pricing and divergence rules as seen by the solver.
struct PriceSpec {
  double a0 = 0.0;
  double a_st = 0.0;
  double a1 = 0.0;
  double f0_eff = 0.0;
  double f1_eff = 0.0;
  Mode mode = Mode::MFG;
};

PriceSpec make_price_spec(const ModelParams& params, Mode mode, bool agg_double_f = true);

// One backward step of the semi-implicit Riccati recursion
//   x = expected_next + dt (C - x expected_next / D),
// solved for x. The quadratic term pairs the current value with the expected
// successor, which keeps the scheme linear at each node.
double riccati_step(double expected_next, double C, double D, double dt);

// Value on the (k, r) lattice, r in {kNever, 0..k}.
struct RiccatiTable {
  int n_steps = 0;
  std::vector<double> values;
  std::vector<double> denom;

  static std::size_t offset(int k) {
    return static_cast<std::size_t>(k) * (k + 3) / 2;
  }
  std::size_t index(int k, int r) const { return offset(k) + age_slot(r); }
  double at(int k, int r) const { return values[index(k, r)]; }
  double denom_at(int k, int r) const { return denom[index(k, r)]; }
  static std::size_t size_for(int n) { return offset(n + 1); }
};

double riccati_closed_form(double C, double D, double h2, double time_to_go);

struct PhiCurve {
  std::vector<double> closed_form;  // exact ODE solution on grid times
  std::vector<double> discrete;     // grid recursion used by the controls
  double C = 0.0, D = 0.0, h2 = 0.0, T = 0.0;
};

PhiCurve solve_phi_ode(const ModelParams& params, const GridSpec& grid);

enum class PhiBarMethod { Direct, FixedPoint };

struct PhiBarOptions {
  PhiBarMethod method = PhiBarMethod::Direct;
  double fp_tol = 1e-14;
  int fp_max_iter = 10000;
};

RiccatiTable solve_phibar(const ModelParams& params, const GridSpec& grid,
                          const PriceSpec& price, const PhiBarOptions& options = {});

struct PicardResult {
  RiccatiTable table;
  std::vector<double> sup_diffs;  // sup-norm change per iteration
  bool monotone = true;           // nonincreasing from the first iterate on
  double worst_increase = 0.0;    // largest pointwise increase seen after iterate 1
  bool nonnegative = true;
  int iterations = 0;
};

PicardResult solve_phibar_picard(const ModelParams& params, const GridSpec& grid,
                                 const PriceSpec& price, double tol, int max_iter);

// Largest per-node contraction factor of the fixed-point mode.
double phibar_contraction(const RiccatiTable& table, const ModelParams& params,
                          const GridSpec& grid);

}  // namespace dsm
