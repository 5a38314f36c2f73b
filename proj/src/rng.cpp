#include "sybillab/rng.hpp"

#include <cmath>

namespace sybillab {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::derive_seed(std::uint64_t master_seed, std::string_view name) {
  // FNV-1a over the stream name, mixed with the master seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(master_seed) ^ h);
}

Rng Rng::derive(std::uint64_t master_seed, std::string_view name) {
  return Rng(derive_seed(master_seed, name));
}

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
  // Rejection sampling on the top of the range keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % bound;
}

std::uint64_t Rng::geometric_failures(double q) {
  if (q >= 1.0) return 0;
  double u = uniform01();
  // Inversion: floor(log(1-u) / log(1-q)).
  return static_cast<std::uint64_t>(std::floor(std::log1p(-u) / std::log1p(-q)));
}

}  // namespace sybillab
