#pragma once

#include <cstdint>
#include <string_view>

namespace samplation {

/// 64-bit seed type used across the library.
using Seed = std::uint64_t;

/// SplitMix64 finaliser. Used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent child seed from a parent and a stream index.
Seed derive_seed(Seed parent, std::uint64_t stream) noexcept;

/// Derives a child seed from a parent and a textual stream tag.
Seed derive_seed(Seed parent, std::string_view tag) noexcept;

/// xoshiro256** generator with platform-independent helper draws.
///
/// The standard distributions are implementation defined, so every draw the
/// library makes goes through the members below to keep outputs identical
/// across standard libraries.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(Seed seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept;

  /// Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t uniform_index(std::uint64_t bound) noexcept;

  /// Uniform integer in [lo, hi], inclusive on both ends.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) noexcept;

  /// Uniform real in [0, 1) with 53 random bits.
  double uniform01() noexcept;

  /// Uniform real in the closed interval [0, 1].
  double uniform_closed01() noexcept;

  /// Standard normal draw (Box-Muller, one value per call).
  double normal() noexcept;

 private:
  std::uint64_t s_[4];
};

}  // namespace samplation
