#pragma once

#include <cstdint>

#include "mabesov/types.hpp"

namespace mabesov {

// splitmix64; used to derive independent substreams from one seed.
inline std::uint64_t split_mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// xoshiro256**. Self-contained so that streams are reproducible across
// standard libraries; std::mt19937 distributions are not portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) {
      s = split_mix(s);
      w = s;
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform in [0,1)
  Scalar uniform() { return static_cast<Scalar>(next() >> 11) * 0x1.0p-53; }

  Scalar uniform(Scalar a, Scalar b) { return a + (b - a) * uniform(); }

  // standard normal (Box-Muller, no cached spare to keep streams simple)
  Scalar normal() {
    Scalar u1 = uniform();
    while (u1 <= 0x1.0p-60) u1 = uniform();
    const Scalar u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // integer in [0, n)
  Index index(Index n) { return static_cast<Index>(next() % static_cast<std::uint64_t>(n)); }

  int sign() { return (next() & 1u) ? 1 : -1; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t state_[4];
};

// Deterministic per-sample stream independent of evaluation order.
inline Rng substream(std::uint64_t seed, std::uint64_t tag) {
  return Rng(split_mix(seed ^ split_mix(tag + 0x517cc1b727220a95ull)));
}

inline GridFunction random_vector(Index n, std::uint64_t seed) {
  Rng rng(seed);
  GridFunction v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

}  // namespace mabesov
