#pragma once

// Seeds and the portable random primitives built on them.
//
// Every random quantity in hdemg is derived from a Seed through functions
// defined here. std::mt19937_64 is bit-specified by the standard, but the
// standard distributions are not, so bounded integers, shuffles and
// Gaussian deviates are implemented locally to keep output identical across
// standard library implementations.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hdemg {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

struct Seed {
  std::uint64_t value = 0;
  std::string ns;

  friend bool operator==(const Seed&, const Seed&) = default;
};

// Child seed for (namespace, index) under `parent`. Deterministic; distinct
// (namespace, index) pairs map to distinct values with overwhelming
// probability (64-bit mixing of a 128-bit key).
inline Seed derive(const Seed& parent, std::string_view ns, std::uint64_t index = 0) {
  std::uint64_t key = detail::splitmix64(parent.value ^ detail::splitmix64(detail::fnv1a(parent.ns)));
  key = detail::splitmix64(key ^ detail::splitmix64(detail::fnv1a(ns)));
  key = detail::splitmix64(key + detail::splitmix64(index ^ 0x6a09e667f3bcc908ULL));
  return Seed{key, std::string(ns)};
}

class Rng {
 public:
  // The namespace is part of a seed's identity: equal values under different
  // tags give independent streams.
  explicit Rng(const Seed& seed)
      : engine_(detail::splitmix64(seed.value ^ detail::splitmix64(detail::fnv1a(seed.ns)))) {}
  explicit Rng(std::uint64_t value) : engine_(detail::splitmix64(value)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be nonzero.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return x % bound;
    }
  }

  // Uniform real in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal deviate (Box-Muller, pairs cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Seeded uniform permutation of 0..n-1 (Fisher-Yates).
inline std::vector<std::size_t> shuffled_indices(const Seed& seed, std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(idx));
  return idx;
}

}  // namespace hdemg
