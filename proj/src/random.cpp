#include "lexstab/random.hpp"

#include <cmath>
#include <numbers>
#include <string_view>

namespace lexstab {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double box_muller(std::uint64_t a, std::uint64_t b) {
  // (0, 1] keeps the logarithm finite.
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = to_unit(b);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Full 128-bit product; returns the low word and stores the high word.
inline std::uint64_t mul_64x64(std::uint64_t a, std::uint64_t b, std::uint64_t& hi) {
  const std::uint64_t a_lo = a & 0xFFFFFFFFu, a_hi = a >> 32;
  const std::uint64_t b_lo = b & 0xFFFFFFFFu, b_hi = b >> 32;
  const std::uint64_t ll = a_lo * b_lo;
  const std::uint64_t lh = a_lo * b_hi;
  const std::uint64_t hl = a_hi * b_lo;
  const std::uint64_t hh = a_hi * b_hi;
  const std::uint64_t mid = (ll >> 32) + (lh & 0xFFFFFFFFu) + (hl & 0xFFFFFFFFu);
  hi = hh + (lh >> 32) + (hl >> 32) + (mid >> 32);
  return (mid << 32) | (ll & 0xFFFFFFFFu);
}

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

PhiloxBlock philox4x32_10(PhiloxBlock ctr, std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RandomStream::RandomStream(std::uint64_t seed, StreamDomain domain, std::uint32_t replicate) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      replicate_(replicate),
      domain_(static_cast<std::uint32_t>(domain)) {}

std::uint64_t RandomStream::next_u64() noexcept {
  if (used_ == 2) {
    block_ = philox4x32_10({static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32),
                            replicate_, domain_},
                           key_);
    ++index_;
    used_ = 0;
  }
  const std::uint64_t out = (static_cast<std::uint64_t>(block_[2 * used_ + 1]) << 32) | block_[2 * used_];
  ++used_;
  return out;
}

double RandomStream::next_unit() noexcept { return to_unit(next_u64()); }

std::uint64_t RandomStream::next_below(std::uint64_t bound) noexcept {
  std::uint64_t hi = 0;
  std::uint64_t lo = mul_64x64(next_u64(), bound, hi);
  if (lo < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (lo < threshold) lo = mul_64x64(next_u64(), bound, hi);
  }
  return hi;
}

double RandomStream::next_normal() noexcept {
  const std::uint64_t a = next_u64();
  const std::uint64_t b = next_u64();
  return box_muller(a, b);
}

double RandomStream::normal_at(std::uint64_t seed, StreamDomain domain, std::uint32_t replicate,
                               std::uint64_t index) noexcept {
  const PhiloxBlock block = philox4x32_10(
      {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), replicate,
       static_cast<std::uint32_t>(domain)},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  const std::uint64_t a = (static_cast<std::uint64_t>(block[1]) << 32) | block[0];
  const std::uint64_t b = (static_cast<std::uint64_t>(block[3]) << 32) | block[2];
  return box_muller(a, b);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (const char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return splitmix64(seed ^ splitmix64(h));
}

}  // namespace lexstab
