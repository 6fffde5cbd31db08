#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <span>

#include "nce/math.hpp"

namespace nce {

/// splitmix64 step; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Seeded random source. All floating-point draws are built from the raw
/// 64-bit stream with fixed transformations (no std::*_distribution), so a
/// given seed reproduces the same values on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1).
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; generates pairs and caches the spare.
  double normal();

  Vector normal_vector(int n);

  /// Index draw from non-negative (not necessarily normalised) weights.
  /// Consumes exactly one uniform01().
  int categorical(const Vector& weights);

  /// Independent generator for a named sub-stream. Children with distinct
  /// stream ids (and the parent itself) produce unrelated sequences.
  Rng child(std::uint64_t stream) const { return Rng(mix_seed(seed_, stream)); }

  /// Replay hook: values handed here are returned by uniform01() ahead of
  /// the engine. Used by enumeration oracles to drive exact branches.
  void queue_uniforms(std::span<const double> u);

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
  std::deque<double> queued_;
};

}  // namespace nce
