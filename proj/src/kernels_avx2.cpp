#include "dsm/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define DSM_HAVE_X86 1
#endif

namespace dsm::kernels::avx2 {

#ifdef DSM_HAVE_X86

// Same operation order as the scalar kernels and no fused multiply-add, so the
// two paths agree bit for bit.

__attribute__((target("avx2"))) void psibar_slice(const PsiSlice& a) {
  const __m256d w_stay = _mm256_set1_pd(a.w_stay), w_jump = _mm256_set1_pd(a.w_jump);
  const __m256d g0 = _mm256_set1_pd(a.g0), g_st = _mm256_set1_pd(a.g_st),
                g_q = _mm256_set1_pd(a.g_q);
  const __m256d keep = _mm256_set1_pd(a.keep), dc = _mm256_set1_pd(a.dc);
  int m = 0;
  for (; m + 4 <= a.count; m += 4) {
    const __m256d s = _mm256_add_pd(_mm256_loadu_pd(a.stay + m), _mm256_loadu_pd(a.stay + m + 1));
    const __m256d j = _mm256_add_pd(_mm256_loadu_pd(a.jump + m), _mm256_loadu_pd(a.jump + m + 1));
    const __m256d e = _mm256_add_pd(_mm256_mul_pd(w_stay, s), _mm256_mul_pd(w_jump, j));
    const __m256d g =
        _mm256_add_pd(_mm256_add_pd(g0, _mm256_mul_pd(g_st, _mm256_loadu_pd(a.q_st + m))),
                      _mm256_mul_pd(g_q, _mm256_loadu_pd(a.q_hat + m)));
    _mm256_storeu_pd(a.out + m, _mm256_sub_pd(_mm256_mul_pd(keep, e), _mm256_mul_pd(dc, g)));
  }
  for (; m < a.count; ++m) {
    const double e = a.w_stay * (a.stay[m] + a.stay[m + 1]) + a.w_jump * (a.jump[m] + a.jump[m + 1]);
    const double g = (a.g0 + a.g_st * a.q_st[m]) + a.g_q * a.q_hat[m];
    a.out[m] = a.keep * e - a.dc * g;
  }
}

__attribute__((target("avx2"))) void player_feedback(const PlayerFeedback& a) {
  const __m256d ca = _mm256_set1_pd(a.a), cb = _mm256_set1_pd(a.b), K = _mm256_set1_pd(a.K);
  const __m256d g = _mm256_set1_pd(a.g_common), phi = _mm256_set1_pd(a.phi);
  const __m256d neg_inv = _mm256_set1_pd(-a.inv_ak);
  int i = 0;
  for (; i + 4 <= a.count; i += 4) {
    const __m256d q = _mm256_loadu_pd(a.q + i);
    const __m256d s = _mm256_loadu_pd(a.s + i);
    const __m256d psi = _mm256_add_pd(_mm256_mul_pd(ca, q), cb);
    const __m256d inner = _mm256_add_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(K, q), g), _mm256_mul_pd(phi, s)), psi);
    _mm256_storeu_pd(a.psi + i, psi);
    _mm256_storeu_pd(a.alpha + i, _mm256_mul_pd(neg_inv, inner));
  }
  for (; i < a.count; ++i) {
    const double psi = a.a * a.q[i] + a.b;
    a.psi[i] = psi;
    a.alpha[i] = -a.inv_ak * (((a.K * a.q[i] + a.g_common) + a.phi * a.s[i]) + psi);
  }
}

__attribute__((target("avx2"))) static inline void accumulate(double* p, __m256d dt,
                                                              __m256d v) {
  _mm256_storeu_pd(p, _mm256_add_pd(_mm256_loadu_pd(p), _mm256_mul_pd(dt, v)));
}

__attribute__((target("avx2"))) void player_advance(const PlayerAdvance& a) {
  const double half_a = 0.5 * a.A, half_c = 0.5 * a.C, half_k = 0.5 * a.K;
  const __m256d dt = _mm256_set1_pd(a.dt), ha = _mm256_set1_pd(half_a),
                hc = _mm256_set1_pd(half_c), hk = _mm256_set1_pd(half_k);
  const __m256d price = _mm256_set1_pd(a.price), active = _mm256_set1_pd(a.active),
                target = _mm256_set1_pd(a.target), penalty = _mm256_set1_pd(a.penalty),
                growth = _mm256_set1_pd(a.growth), vol = _mm256_set1_pd(a.vol);
  int i = 0;
  for (; i + 4 <= a.count; i += 4) {
    const __m256d u = _mm256_loadu_pd(a.alpha + i);
    const __m256d q = _mm256_loadu_pd(a.q + i);
    const __m256d s = _mm256_loadu_pd(a.s + i);
    const __m256d x = _mm256_add_pd(q, u);
    accumulate(a.acc_g + i, dt, _mm256_mul_pd(ha, _mm256_mul_pd(u, u)));
    accumulate(a.acc_storage + i, dt, _mm256_mul_pd(hc, _mm256_mul_pd(s, s)));
    accumulate(a.acc_l + i, dt, _mm256_mul_pd(hk, _mm256_mul_pd(x, x)));
    accumulate(a.acc_c + i, dt, _mm256_mul_pd(x, price));
    accumulate(a.acc_d + i, dt,
               _mm256_mul_pd(active, _mm256_mul_pd(_mm256_sub_pd(x, target), penalty)));
    _mm256_storeu_pd(a.s + i, _mm256_add_pd(s, _mm256_mul_pd(dt, u)));
    const __m256d step = _mm256_add_pd(growth, _mm256_mul_pd(vol, _mm256_loadu_pd(a.idio + i)));
    _mm256_storeu_pd(a.q + i, _mm256_mul_pd(q, step));
  }
  for (; i < a.count; ++i) {
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

#else

void psibar_slice(const PsiSlice& a) { scalar::psibar_slice(a); }
void player_feedback(const PlayerFeedback& a) { scalar::player_feedback(a); }
void player_advance(const PlayerAdvance& a) { scalar::player_advance(a); }

#endif

}  // namespace dsm::kernels::avx2
