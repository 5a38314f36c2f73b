#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sybillab {

/// Seeded random stream.
///
/// Uses std::mt19937_64 for raw bits (its output sequence is fixed by the
/// standard) and maps bits to indices/reals itself, so every stream is
/// bit-reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream keyed by a name, e.g. Rng::derive(42, "synthesis").
  static Rng derive(std::uint64_t master_seed, std::string_view name);
  static std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view name);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Uniform real in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Number of failures before the first success, success probability q.
  std::uint64_t geometric_failures(double q);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace sybillab
