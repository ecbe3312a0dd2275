// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include "ivb/core/types.hpp"

namespace ivb {

/// Seeded xoshiro256** stream.
///
/// The state is expanded from the 64-bit seed with splitmix64, so a stream is a
/// pure function of its seed on every platform. Normal draws use the
/// Box-Muller transform on two uniforms:
///
///   u1 = 1 - U[0,1),  u2 = U[0,1)
///   z0 = sqrt(-2 ln u1) cos(2 pi u2),  z1 = sqrt(-2 ln u1) sin(2 pi u2)
///
/// z0 is returned first and z1 is cached for the next call.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  /// Child stream keyed by (seed, index). Depends only on the seed this
  /// stream was created from, never on how far it has been advanced.
  Rng split(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next();
  result_type operator()() { return next(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();

  /// Uniform integer on [0, bound), bound >= 1, without modulo bias.
  std::uint64_t below(std::uint64_t bound);

  double normal();

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline Rng seed_rng(std::uint64_t seed) { return Rng(seed); }

/// n i.i.d. N(0, 1) draws; throws InvalidArgument for n == 0.
Vector sample_standard_normal(Rng& rng, Index n);

/// In-place Fisher-Yates shuffle driven by Rng::below, reproducible across
/// standard library implementations.
template <typename It>
void shuffle(It first, It last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = rng.below(i);
    using std::swap;
    swap(first[i - 1], first[j]);
  }
}

}  // namespace ivb
