#pragma once

#include <cstdint>
#include <initializer_list>

/**
 * Deterministic seeded substreams.
 *
 * Experiments fan out over (prompt, trial, draw) coordinates and may run
 * those units concurrently. Each unit derives its own generator from the
 * master seed plus its coordinates, so results never depend on scheduling.
 * Streams are SplitMix64 counters; derivation folds every coordinate through
 * the same avalanche, keeping distinct coordinate tuples on distinct,
 * well-separated streams.
 */

namespace dps {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer (Vigna / Steele et al. variant).
inline std::uint64_t avalanche64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// Folds a coordinate path into a stream seed. Equal (seed, path) pairs give
// equal results; any change to either gives an unrelated stream.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = avalanche64(seed + kGolden);
  for (std::uint64_t c : path) {
    s = avalanche64(s ^ (avalanche64(c + kGolden) + (s << 6) + (s >> 2)));
  }
  return s;
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    return avalanche64(state_);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

inline RngStream substream(std::uint64_t seed,
                           std::initializer_list<std::uint64_t> path) {
  return RngStream(derive_seed(seed, path));
}

}  // namespace dps
