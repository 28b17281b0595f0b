#pragma once

#include <cstdint>
#include <string>

namespace rq {

// Counter-free splittable RNG: xoshiro256++ seeded through splitmix64.
// We do not use <random> engines or distributions because their output is
// not pinned across standard library implementations, and experiment
// records must reproduce bit-for-bit on every platform.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}

  // Streams with distinct ids are independent for all practical purposes;
  // identical (seed, id) reproduce the same draws.
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id) {
    std::uint64_t sm = master_seed ^ (stream_id * 0xd1342543de82ef95ULL);
    for (auto& w : s_) w = splitmix64(sm);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Exactly uniform on [0, n).  Debiased multiply-shift (Lemire).
  std::uint32_t bounded(std::uint32_t n) {
    std::uint64_t x = next_u64() >> 32;
    std::uint64_t m = x * n;
    std::uint32_t l = static_cast<std::uint32_t>(m);
    if (l < n) {
      std::uint32_t t = (-n) % n;
      while (l < t) {
        x = next_u64() >> 32;
        m = x * n;
        l = static_cast<std::uint32_t>(m);
      }
    }
    return static_cast<std::uint32_t>(m >> 32);
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

}  // namespace rq
