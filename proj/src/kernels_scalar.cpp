#include "dsm/kernels.hpp"

namespace dsm::kernels::scalar {

void psibar_slice(const PsiSlice& a) {
  for (int m = 0; m < a.count; ++m) {
    const double e = a.w_stay * (a.stay[m] + a.stay[m + 1]) + a.w_jump * (a.jump[m] + a.jump[m + 1]);
    const double g = (a.g0 + a.g_st * a.q_st[m]) + a.g_q * a.q_hat[m];
    a.out[m] = a.keep * e - a.dc * g;
  }
}

void player_feedback(const PlayerFeedback& a) {
  for (int i = 0; i < a.count; ++i) {
    const double psi = a.a * a.q[i] + a.b;
    a.psi[i] = psi;
    a.alpha[i] = -a.inv_ak * (((a.K * a.q[i] + a.g_common) + a.phi * a.s[i]) + psi);
  }
}

void player_advance(const PlayerAdvance& a) {
  const double half_a = 0.5 * a.A, half_c = 0.5 * a.C, half_k = 0.5 * a.K;
  for (int i = 0; i < a.count; ++i) {
    const double u = a.alpha[i];
    const double q = a.q[i];
    const double s = a.s[i];
    const double x = q + u;
    a.acc_g[i] += a.dt * (half_a * (u * u));
    a.acc_storage[i] += a.dt * (half_c * (s * s));
    a.acc_l[i] += a.dt * (half_k * (x * x));
    a.acc_c[i] += a.dt * (x * a.price);
    a.acc_d[i] += a.dt * (a.active * ((x - a.target) * a.penalty));
    a.s[i] = s + a.dt * u;
    a.q[i] = q * (a.growth + a.vol * a.idio[i]);
  }
}

}  // namespace dsm::kernels::scalar
