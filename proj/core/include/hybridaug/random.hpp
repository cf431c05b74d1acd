#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace hybridaug {

/// Mixes several 64-bit values into one seed (splitmix64 finalizer chain).
/// Used to derive per-batch and per-image streams so that serial and
/// parallel execution see identical random numbers.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// Deterministic random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distributions are implemented here rather than taken from
/// <random> because the standard distributions are implementation-defined
/// and would break bit-reproducibility across toolchains.
///
/// One stream per worker; a stream is never shared between threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Bernoulli draw: true with probability p. p <= 0 never fires, p >= 1 always fires.
  bool chance(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller (no cached second value).
  double normal();

  /// Uniform random permutation of [0, n) by Fisher-Yates.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace hybridaug
