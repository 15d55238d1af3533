#include "cubepersist/rng.hpp"

#include <cmath>
#include <numbers>

namespace cubepersist {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SeedStream SeedStream::derived(std::span<const std::uint64_t> extra) const {
  SeedStream out = *this;
  out.path.insert(out.path.end(), extra.begin(), extra.end());
  return out;
}

SeedStream SeedStream::derived(std::initializer_list<std::uint64_t> extra) const {
  return derived(std::span<const std::uint64_t>(extra.begin(), extra.size()));
}

std::uint64_t SeedStream::leaf_seed() const {
  std::uint64_t state = master_seed ^ 0xA5A5A5A55A5A5A5AULL;
  std::uint64_t seed = splitmix64(state);
  for (std::uint64_t p : path) {
    state ^= p + 0x632BE59BD9B4E019ULL;
    seed = splitmix64(state) ^ (seed * 0x2545F4914F6CDD1DULL);
  }
  return seed;
}

double Rng::uniform01() {
  // 53-bit mantissa, mapped to (0,1].
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1p-53;
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  double u1 = uniform01();
  double u2 = uniform01();
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

Rng derive_rng(const SeedStream& stream, std::initializer_list<std::uint64_t> path) {
  return Rng(stream.derived(path));
}

}  // namespace cubepersist
