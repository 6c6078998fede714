#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace hsidn {

/// splitmix64 mixing step; the standard seed-derivation function.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Splittable-counter sub-seed scheme: stream `tag` of `seed` is
/// splitmix64(seed + GAMMA*(tag+1)). Used for per-stage and per-band
/// noise streams so parallel generation stays deterministic.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed + 0x9E3779B97F4A7C15ULL * (tag + 1));
}

/// Deterministic random source. The engine (mt19937_64) is pinned by the
/// standard; normal and subset draws are implemented here rather than with
/// std distributions, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in (0, 1].
  double next_unit() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; caches the paired draw.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform integer in [0, n) by modulo rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t bound = (UINT64_MAX / n) * n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= bound);
    return x % n;
  }

  bool coin() { return below(2) == 1; }

  /// Uniform k-subset of {0..n-1} by partial Fisher-Yates; pick order is
  /// part of the deterministic contract.
  std::vector<std::uint32_t> subset(std::uint32_t n, std::uint32_t k) {
    std::vector<std::uint32_t> idx(n);
    for (std::uint32_t i = 0; i < n; ++i) idx[i] = i;
    if (k > n) k = n;
    for (std::uint32_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::uint32_t>(below(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hsidn
