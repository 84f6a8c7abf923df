#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>

namespace synthpop {

/// Seeded random source with platform-independent derived distributions.
///
/// The engine is std::mt19937_64 (its output sequence is fixed by the
/// standard); uniform, normal, Gumbel and categorical draws are implemented
/// here rather than through <random> distributions, whose algorithms are
/// implementation-defined. Named sub-streams let independent components
/// (splitting, critic noise, sampling) be reproduced in isolation from a
/// single master seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream derived from `master` and a component name.
  static Rng stream(std::uint64_t master, std::string_view name);

  /// Child stream derived from this stream's next output and `name`.
  Rng fork(std::string_view name);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform on the open interval (0, 1).
  double uniform_open();

  double normal();

  double gumbel();

  /// Unbiased integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Index drawn with probability proportional to `weights`.
  std::size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

std::uint64_t splitmix64(std::uint64_t x);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace synthpop
