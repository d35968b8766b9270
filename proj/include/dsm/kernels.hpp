#pragma once

namespace dsm::kernels {

// One (k, r) slice of the projected linear recursion, vectorised over m.
//   e      = w_stay (stay[m] + stay[m+1]) + w_jump (jump[m] + jump[m+1])
//   g      = (g0 + g_st q_st[m]) + g_q q_hat[m]
//   out[m] = keep e - dc g
struct PsiSlice {
  int count = 0;
  const double* stay = nullptr;  // successor row without a jump, count + 1 entries
  const double* jump = nullptr;  // successor row after a jump, count + 1 entries
  const double* q_hat = nullptr;
  const double* q_st = nullptr;
  double w_stay = 0.0, w_jump = 0.0;
  double keep = 1.0, dc = 0.0;
  double g0 = 0.0, g_st = 0.0, g_q = 0.0;
  double* out = nullptr;
};

// Individual feedback for a batch of players sharing one common node.
//   psi[i]   = a q[i] + b
//   alpha[i] = -inv_ak ((K q[i] + g_common) + phi s[i] + psi[i])
struct PlayerFeedback {
  int count = 0;
  const double* q = nullptr;
  const double* s = nullptr;
  double a = 0.0, b = 0.0, K = 0.0, g_common = 0.0, phi = 0.0, inv_ak = 0.0;
  double* alpha = nullptr;
  double* psi = nullptr;
};

// Running cost accumulation and one forward step for a batch of players.
struct PlayerAdvance {
  int count = 0;
  double* q = nullptr;
  double* s = nullptr;
  const double* alpha = nullptr;
  const double* idio = nullptr;  // +1 / -1
  double dt = 0.0, A = 0.0, C = 0.0, K = 0.0;
  double price = 0.0;            // market price at this step
  double active = 0.0;           // 1 during activation
  double target = 0.0;           // E[Q] + alpha_bar
  double penalty = 0.0;          // f0 + f1 (aggregate divergence)
  double growth = 1.0;           // 1 + dt mu + sqrt(dt) sigma0 eps
  double vol = 0.0;              // sqrt(dt) sigma
  double* acc_g = nullptr;
  double* acc_storage = nullptr;
  double* acc_l = nullptr;
  double* acc_c = nullptr;
  double* acc_d = nullptr;
};

enum class Isa { Scalar, Avx2 };

bool avx2_supported();
Isa active_isa();
void set_isa(Isa isa);  // falls back to scalar when unsupported
const char* isa_name(Isa isa);

void psibar_slice(const PsiSlice& args);
void player_feedback(const PlayerFeedback& args);
void player_advance(const PlayerAdvance& args);

namespace scalar {
void psibar_slice(const PsiSlice& args);
void player_feedback(const PlayerFeedback& args);
void player_advance(const PlayerAdvance& args);
}  // namespace scalar

namespace avx2 {
void psibar_slice(const PsiSlice& args);
void player_feedback(const PlayerFeedback& args);
void player_advance(const PlayerAdvance& args);
}  // namespace avx2

}  // namespace dsm::kernels
