#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace cubepersist {

/// Hierarchical seed derivation. A (master_seed, path) pair maps to one
/// deterministic generator; distinct paths give independent streams, so
/// repetitions can run on any thread schedule without changing results.
struct SeedStream {
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> path;

  SeedStream() = default;
  explicit SeedStream(std::uint64_t master) : master_seed(master) {}

  SeedStream derived(std::span<const std::uint64_t> extra) const;
  SeedStream derived(std::initializer_list<std::uint64_t> extra) const;
  std::uint64_t leaf_seed() const;
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministic generator. Gaussian draws use Box-Muller on top of
/// mt19937_64 so the byte stream does not depend on the standard library's
/// unspecified normal_distribution algorithm.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  explicit Rng(const SeedStream& stream) : engine_(stream.leaf_seed()) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on (0,1]; never returns 0 so log() is safe.
  double uniform01();

  /// Standard normal draw.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

Rng derive_rng(const SeedStream& stream, std::initializer_list<std::uint64_t> path);

}  // namespace cubepersist
