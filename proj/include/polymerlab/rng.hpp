#pragma once

#include <cstdint>

namespace polymerlab::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Folds one more key word into a running hash.
constexpr std::uint64_t combine(std::uint64_t h, std::uint64_t v) noexcept {
  return mix64(h ^ (v * 0xd6e8feb86659fd93ULL + 0x2545f4914f6cdd1dULL));
}

constexpr std::uint64_t combine(std::uint64_t h, std::int64_t v) noexcept {
  return combine(h, static_cast<std::uint64_t>(v));
}

// Maps 64 random bits to the open interval (0, 1).
constexpr double to_unit_open(std::uint64_t h) noexcept {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

// Worker seed for task `index`. Injective in `index` for a fixed master seed:
// the affine map is a bijection mod 2^64 and mix64 is a bijection.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master + (index + 1) * kGolden);
}

// Inverse of the standard normal CDF (Wichura AS241, ~1e-16 relative).
double inverse_normal_cdf(double p);

// Reproducible stream of variates keyed by (seed, stream id).
class CounterStream {
 public:
  constexpr CounterStream(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(combine(mix64(seed), stream)) {}

  constexpr std::uint64_t next_u64() noexcept { return mix64(key_ ^ mix64(counter_++)); }
  constexpr double uniform() noexcept { return to_unit_open(next_u64()); }
  double normal() { return inverse_normal_cdf(uniform()); }
  int below(int k) noexcept { return static_cast<int>(uniform() * k); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace polymerlab::rng
