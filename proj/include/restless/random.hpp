#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace restless {

/// Mixes a master seed with a stream index (splitmix64 finalizer), so that
/// independent streams can be derived from one user-facing seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Seeded generator with platform-independent uniform draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1) built from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Samples an index from a cumulative distribution (last entry ~ 1).
  std::size_t sample_cumulative(std::span<const double> cumulative);

 private:
  std::mt19937_64 engine_;
};

}  // namespace restless
