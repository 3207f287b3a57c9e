#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace gpest {

/// splitmix64 finalizer; scrambles a 64-bit value.
inline std::uint64_t scramble_u64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a tag.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag) {
  return scramble_u64(scramble_u64(base) ^ (tag * 0xd6e8feb86659fd93ULL));
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t tag1,
                              std::uint64_t tag2) {
  return mix_seed(mix_seed(base, tag1), tag2);
}

/// Deterministic PRNG (splitmix64 stream, Box-Muller normals).
///
/// Unlike std::normal_distribution the sequence is identical on every
/// platform and compiler for a given seed, which the reproducibility
/// guarantees of the runners rely on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in (lo, hi] mapped from (0, 1].
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (1.0 - uniform());
  }

  /// Standard normal draw.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /// Unbiased uniform index in [0, n); n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t threshold = (0ULL - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gpest
