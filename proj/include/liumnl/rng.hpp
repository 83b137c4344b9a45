#pragma once

#include <cmath>
#include <cstdint>

namespace liumnl {

// The simulation's reproducibility contract is built on this file: every
// stream below is a pure function of a 64-bit seed, so results never depend
// on thread count, platform RNG libraries, or call interleaving.

inline constexpr std::uint64_t kGolden64 = 0x9e3779b97f4a7c15ULL;

/// splitmix64 output scrambler (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

/// Order-sensitive combination of a seed with two indices. Used to derive
/// replication seeds as stable_mix(master_seed, cell_index, replication) and
/// per-purpose substreams within a replication. Frozen: changing this
/// function changes every simulated number.
constexpr std::uint64_t stable_mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = mix64(seed + kGolden64);
  h = mix64(h ^ (a + kGolden64));
  h = mix64(h ^ (b + kGolden64));
  return h;
}

/// splitmix64 sequence generator.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += kGolden64;
    return mix64(state_);
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via the Box-Muller transform. Consumes exactly two
  /// 64-bit draws per call; the sine partner is discarded so the stream
  /// layout stays independent of call parity.
  double next_normal() {
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = next_uniform();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace liumnl
