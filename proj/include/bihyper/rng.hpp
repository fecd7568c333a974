#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace bihyper {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// xoshiro256++ seeded via splitmix64. Self-contained so streams are
// identical on every platform (std::normal_distribution is not).
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  uint64_t nextU64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double nextUniform() { return static_cast<double>(nextU64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double nextUniform(double lo, double hi) { return lo + (hi - lo) * nextUniform(); }

  // Standard normal via Box-Muller (cached pair).
  double nextNormal() {
    if (hasCached_) {
      hasCached_ = false;
      return cached_;
    }
    double u1 = nextUniform();
    while (u1 <= 0.0) u1 = nextUniform();
    const double u2 = nextUniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(theta);
    hasCached_ = true;
    return r * std::cos(theta);
  }

  // Unbiased integer in [0, bound) by rejection.
  uint64_t nextBounded(uint64_t bound) {
    if (bound == 0) return 0;
    const uint64_t threshold = (~bound + 1) % bound;  // 2^64 mod bound
    for (;;) {
      const uint64_t x = nextU64();
      if (x >= threshold) return x % bound;
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(nextBounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Decorrelated seed for a substream (per-chunk, per-epoch, per-dimension).
  static uint64_t derive(uint64_t seed, uint64_t stream) {
    uint64_t sm = seed ^ (0x6a09e667f3bcc909ULL + stream * 0x1f83d9abfb41bd6bULL);
    uint64_t a = splitmix64(sm);
    return a ^ splitmix64(sm);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t s_[4] = {};
  double cached_ = 0.0;
  bool hasCached_ = false;
};

}  // namespace bihyper
