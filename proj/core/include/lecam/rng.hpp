#pragma once

#include <cstdint>
#include <random>

namespace lecam {

/// Deterministic random stream. All value conversions are done by hand on
/// top of mt19937_64 so that sequences are identical across standard-library
/// implementations; std::*_distribution is never used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform index in [0, n). Lemire multiply-shift; slight bias is
  /// irrelevant at 64-bit width.
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal via Box-Muller; the paired value is cached.
  double normal();

  /// Derives an independent stream for substream `tag` of `seed`.
  static Rng substream(std::uint64_t seed, std::uint64_t tag);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer, used for seed derivation and content hashing.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace lecam
