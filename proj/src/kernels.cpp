#include "dsm/kernels.hpp"

#include <atomic>

namespace dsm::kernels {

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

namespace {
std::atomic<Isa>& isa_slot() {
  static std::atomic<Isa> slot{avx2_supported() ? Isa::Avx2 : Isa::Scalar};
  return slot;
}
}  // namespace

Isa active_isa() { return isa_slot().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (isa == Isa::Avx2 && !avx2_supported()) isa = Isa::Scalar;
  isa_slot().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void psibar_slice(const PsiSlice& args) {
  if (active_isa() == Isa::Avx2)
    avx2::psibar_slice(args);
  else
    scalar::psibar_slice(args);
}

void player_feedback(const PlayerFeedback& args) {
  if (active_isa() == Isa::Avx2)
    avx2::player_feedback(args);
  else
    scalar::player_feedback(args);
}

void player_advance(const PlayerAdvance& args) {
  if (active_isa() == Isa::Avx2)
    avx2::player_advance(args);
  else
    scalar::player_advance(args);
}

}  // namespace dsm::kernels
