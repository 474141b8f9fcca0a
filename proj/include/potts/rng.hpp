#pragma once

#include <cstdint>
#include <random>

namespace potts {

// SplitMix64 mixer (Steele/Lea/Vigna); used to expand seeds and derive
// replica streams.
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

// The one randomness source of the library: a SplitMix64-expanded
// std::mt19937_64.  mt19937_64 is pinned by the C++ standard and the draw
// helpers below are arithmetic-only, so any trajectory replays bit-exactly
// from its seed on every platform.
//
// Streams: replica i of master seed s is seeded with
// SplitMix64{s + (i+1)*0x9E3779B97F4A7C15}.next(), giving independent,
// reproducible per-replica generators.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(SplitMix64{seed}.next()) {}

  static Rng stream(std::uint64_t master, std::uint64_t index) {
    SplitMix64 sm{master + (index + 1) * 0x9E3779B97F4A7C15ULL};
    return Rng(sm.next());
  }

  std::uint64_t next_u64() { return gen_(); }

  // Unbiased draw from {0, ..., n-1} by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t min = (-n) % n;  // 2^64 mod n
    std::uint64_t x;
    do {
      x = gen_();
    } while (x < min);
    return x % n;
  }

  // 53-bit uniform in [0,1).
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace potts
