#pragma once

/**
 * Deterministic randomness helpers.
 *
 * Everything that draws random values in this project goes through these
 * helpers so results are bit-identical across runs, platforms, and thread
 * schedules. std::mt19937_64 output is standardized; the standard
 * distributions are not, so uniform draws are implemented here.
 */

#include <cstdint>
#include <random>

namespace hydec {

/// splitmix64 finalizer. Fixed constants, stable everywhere.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Order-sensitive combine for deriving child seeds, e.g.
/// stable_hash(master_seed, utterance_id, attempt).
inline std::uint64_t stable_hash(std::uint64_t a) { return splitmix64(a); }

template <typename... Rest>
std::uint64_t stable_hash(std::uint64_t a, std::uint64_t b, Rest... rest) {
  return stable_hash(splitmix64(a) ^ (b + 0x9E3779B97F4A7C15ULL), rest...);
}

/// Maps a 64-bit word to [0, 1) with 53-bit resolution.
inline double to_unit_real(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Seeded generator with portable uniform draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform real in [0, 1).
  double next_unit() { return to_unit_real(next_u64()); }

  /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  /// Uniform integer in [0, n) excluding `excluded`. Requires n >= 2.
  std::uint64_t next_below_except(std::uint64_t n, std::uint64_t excluded) {
    std::uint64_t v = next_below(n - 1);
    return v >= excluded ? v + 1 : v;
  }

  bool bernoulli(double p) { return next_unit() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hydec
