#pragma once

#include <cstdint>
#include <string_view>

namespace dsm {

std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_tag(std::string_view tag);

// Counter-based stream: the k-th draw is a pure function of (key, k), where the
// key is derived from (seed, purpose tag, indices). Draw order inside one stream
// is the only sequential state.
class Stream {
 public:
  Stream(std::uint64_t seed, std::string_view tag, std::uint64_t i0 = 0,
         std::uint64_t i1 = 0);

  std::uint64_t next_u64();
  double uniform();  // in [0, 1)
  int sign();        // +1 or -1 with probability 1/2
  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace dsm
