#pragma once

#include <vector>

#include "dsm/bsde_linear.hpp"
#include "dsm/dynamics.hpp"
#include "dsm/riccati.hpp"

namespace dsm {

struct EquilibriumTables {
  ModelParams params;
  GridSpec grid;
  PriceSpec price;
  Geometry geo;
  PhiCurve phi;
  RiccatiTable phibar;
  PsiBarTable psibar;
  PsiAffine affine;
};

EquilibriumTables solve_equilibrium(const ModelParams& params, const GridSpec& grid,
                                    const PriceSpec& price);

}  // namespace dsm
