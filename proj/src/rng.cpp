#include "dsm/rng.hpp"

namespace dsm {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Stream::Stream(std::uint64_t seed, std::string_view tag, std::uint64_t i0,
               std::uint64_t i1) {
  std::uint64_t k = mix64(seed + kGolden);
  k = mix64(k ^ hash_tag(tag));
  k = mix64(k ^ (i0 * kGolden + 1));
  k = mix64(k ^ (i1 * 0xd1b54a32d192ed03ULL + 2));
  key_ = k;
}

std::uint64_t Stream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double Stream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int Stream::sign() { return (next_u64() >> 63) ? 1 : -1; }

}  // namespace dsm
