// include/lexstab/random.hpp
//
// Counter-based random numbers. Every stochastic operation in the library
// draws from Philox4x32-10 keyed by the user seed; the counter carries a
// domain tag and a replicate index, so replicate r of any Monte Carlo loop
// sees the same numbers no matter which thread runs it or in what order.
//
// Counter layout (four 32-bit words):
//   [0] draw index, low word     [1] draw index, high word
//   [2] replicate index          [3] domain tag
//
// Distributions are implemented here rather than taken from <random>, whose
// distribution algorithms are unspecified and differ between standard libraries.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace lexstab {

using PhiloxBlock = std::array<std::uint32_t, 4>;

/// Philox4x32 with 10 rounds (Salmon et al. 2011 parameters).
PhiloxBlock philox4x32_10(PhiloxBlock counter, std::array<std::uint32_t, 2> key) noexcept;

/// Domain tags that separate independent uses of the same seed.
enum class StreamDomain : std::uint32_t {
  simulate = 1,
  shuffle_null = 2,
  bm_null = 3,
  bm_null_ties = 4,
  threshold_ties = 5,
  polytomy = 6,
  kmeans = 7,
  fixture = 8,
};

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, StreamDomain domain, std::uint32_t replicate = 0) noexcept;

  /// 64 uniformly distributed bits; consumes half a Philox block.
  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 bits of resolution.
  double next_unit() noexcept;
  /// Uniform integer in [0, bound); bound must be > 0. Lemire's rejection method.
  std::uint64_t next_below(std::uint64_t bound) noexcept;
  /// Standard normal via Box-Muller (cosine branch only).
  double next_normal() noexcept;

  /// Standard normal that depends only on (seed, domain, replicate, index),
  /// independent of any sequential state.
  static double normal_at(std::uint64_t seed, StreamDomain domain, std::uint32_t replicate,
                          std::uint64_t index) noexcept;

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t replicate_;
  std::uint32_t domain_;
  std::uint64_t index_ = 0;
  PhiloxBlock block_{};
  int used_ = 2;  // 64-bit halves of block_ already handed out
};

/// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle(std::span<T> values, RandomStream& rng) noexcept {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(values[i - 1], values[j]);
  }
}

/// 64-bit mixing of a base seed with a label, used to derive per-item seeds
/// (FNV-1a over the label, finalized with the SplitMix64 mixer).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) noexcept;

}  // namespace lexstab
