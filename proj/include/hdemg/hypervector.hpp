#pragma once

// Bipolar hypervectors and their algebra.
//
// Storage: element i is bit (i % 64) of word i / 64, +1 <-> bit 1, -1 <-> bit 0.
// Unused bits of the final word are always zero. Words are serialized
// little-endian, so packed vectors are portable across hosts.
//
// Under this encoding the bipolar product a[i]*b[i] is XNOR of the bits and the
// cosine is (D - 2*hamming) / D.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hdemg/error.hpp"
#include "hdemg/seed.hpp"

namespace hdemg {

inline constexpr std::size_t kDefaultDimension = 10'000;

class Hypervector {
 public:
  static constexpr std::size_t kWordBits = 64;

  Hypervector() = default;

  // All elements -1.
  explicit Hypervector(std::size_t dim) : dim_(dim), words_(word_count(dim), 0) {
    if (dim == 0) throw DimensionError("hypervector dimension must be positive");
  }

  static Hypervector ones(std::size_t dim) {
    Hypervector v(dim);
    std::fill(v.words_.begin(), v.words_.end(), ~std::uint64_t{0});
    v.clear_tail();
    return v;
  }

  static Hypervector from_bipolar(std::span<const int> elements) {
    Hypervector v(elements.size());
    for (std::size_t i = 0; i < elements.size(); ++i) {
      if (elements[i] != 1 && elements[i] != -1) {
        throw ConfigError("bipolar element " + std::to_string(i) + " is " +
                          std::to_string(elements[i]));
      }
      v.set_bit(i, elements[i] == 1);
    }
    return v;
  }

  static Hypervector from_words(std::size_t dim, std::vector<std::uint64_t> words) {
    Hypervector v(dim);
    if (words.size() != v.words_.size()) {
      throw DimensionError("expected " + std::to_string(v.words_.size()) + " words for D=" +
                           std::to_string(dim) + ", got " + std::to_string(words.size()));
    }
    v.words_ = std::move(words);
    if ((v.words_.back() & ~v.tail_mask()) != 0) {
      throw DataError("packed hypervector has bits set beyond its dimension");
    }
    return v;
  }

  static constexpr std::size_t word_count(std::size_t dim) noexcept {
    return (dim + kWordBits - 1) / kWordBits;
  }

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] bool empty() const noexcept { return dim_ == 0; }

  [[nodiscard]] std::span<const std::uint64_t> words() const noexcept { return words_; }
  // Callers writing raw words must keep the tail bits zero (see clear_tail).
  [[nodiscard]] std::span<std::uint64_t> mutable_words() noexcept { return words_; }

  [[nodiscard]] bool bit(std::size_t i) const noexcept {
    return (words_[i / kWordBits] >> (i % kWordBits)) & 1U;
  }
  void set_bit(std::size_t i, bool on) noexcept {
    const std::uint64_t m = std::uint64_t{1} << (i % kWordBits);
    if (on) {
      words_[i / kWordBits] |= m;
    } else {
      words_[i / kWordBits] &= ~m;
    }
  }

  // Bipolar element value.
  [[nodiscard]] int operator[](std::size_t i) const noexcept { return bit(i) ? 1 : -1; }
  void set(std::size_t i, int value) noexcept { set_bit(i, value > 0); }

  [[nodiscard]] std::vector<int> to_bipolar() const {
    std::vector<int> out(dim_);
    for (std::size_t i = 0; i < dim_; ++i) out[i] = (*this)[i];
    return out;
  }

  [[nodiscard]] std::size_t count_positive() const noexcept {
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  [[nodiscard]] Hypervector operator-() const {
    Hypervector out = *this;
    for (auto& w : out.words_) w = ~w;
    out.clear_tail();
    return out;
  }

  // Mask of valid bits in the final word.
  [[nodiscard]] std::uint64_t tail_mask() const noexcept {
    const std::size_t r = dim_ % kWordBits;
    return r == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << r) - 1;
  }

  void clear_tail() noexcept {
    if (!words_.empty()) words_.back() &= tail_mask();
  }

  friend bool operator==(const Hypervector&, const Hypervector&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<std::uint64_t> words_;
};

inline void require_same_dim(const Hypervector& a, const Hypervector& b, const char* op) {
  if (a.dim() != b.dim()) {
    throw DimensionError(std::string(op) + ": dimension mismatch (" + std::to_string(a.dim()) +
                         " vs " + std::to_string(b.dim()) + ")");
  }
}

inline void require_even_dim(std::size_t dim, const char* op) {
  if (dim < 2 || dim % 2 != 0) {
    throw DimensionError(std::string(op) + ": dimension must be even and >= 2, got " +
                         std::to_string(dim));
  }
}

// Balanced random hypervector: exactly D/2 elements are +1, placed by a
// seeded uniform shuffle of the indices.
inline Hypervector random_hypervector(const Seed& seed, std::size_t dim = kDefaultDimension) {
  require_even_dim(dim, "random_hypervector");
  const auto order = shuffled_indices(seed, dim);
  Hypervector v(dim);
  for (std::size_t i = 0; i < dim / 2; ++i) v.set_bit(order[i], true);
  return v;
}

inline Hypervector bind(const Hypervector& a, const Hypervector& b) {
  require_same_dim(a, b, "bind");
  Hypervector out(a.dim());
  auto ow = out.mutable_words();
  auto aw = a.words();
  auto bw = b.words();
  for (std::size_t w = 0; w < ow.size(); ++w) ow[w] = ~(aw[w] ^ bw[w]);
  out.clear_tail();
  return out;
}

inline std::size_t hamming(const Hypervector& a, const Hypervector& b) {
  require_same_dim(a, b, "hamming");
  auto aw = a.words();
  auto bw = b.words();
  std::size_t d = 0;
  for (std::size_t w = 0; w < aw.size(); ++w) d += static_cast<std::size_t>(std::popcount(aw[w] ^ bw[w]));
  return d;
}

// Normalized dot product (sum a[i]*b[i]) / D.
inline double cosine(const Hypervector& a, const Hypervector& b) {
  const auto d = static_cast<double>(a.dim());
  return (d - 2.0 * static_cast<double>(hamming(a, b))) / d;
}

namespace detail {

// 64 bits starting at bit offset `off`; bits past the end read as zero.
inline std::uint64_t load_bits(std::span<const std::uint64_t> w, std::size_t off) noexcept {
  const std::size_t q = off / 64;
  const std::size_t r = off % 64;
  const std::uint64_t lo = q < w.size() ? w[q] : 0;
  if (r == 0) return lo;
  const std::uint64_t hi = q + 1 < w.size() ? w[q + 1] : 0;
  return (lo >> r) | (hi << (64 - r));
}

// OR `len` bits of src starting at src_off into dst starting at dst_off.
inline void or_bit_range(std::span<std::uint64_t> dst, std::size_t dst_off,
                         std::span<const std::uint64_t> src, std::size_t src_off,
                         std::size_t len) noexcept {
  while (len > 0) {
    const std::size_t r = dst_off % 64;
    const std::size_t chunk = std::min<std::size_t>(len, 64 - r);
    const std::uint64_t mask = chunk == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << chunk) - 1;
    dst[dst_off / 64] |= (load_bits(src, src_off) & mask) << r;
    dst_off += chunk;
    src_off += chunk;
    len -= chunk;
  }
}

// Bit-sliced majority over `terms` packed vectors, word_at(term, word)
// yielding the packed words. Per word, a carry-save adder network reduces
// the terms to a binary count held as bit slices, which is then compared
// with terms/2. Ties (possible only for an even term count) take the
// tiebreak bit. Equivalent to bipolarize of the bundled terms.
template <typename WordAt>
Hypervector majority_of(std::size_t dim, std::size_t terms, WordAt&& word_at,
                        const Hypervector& tiebreak) {
  if (tiebreak.dim() != dim) throw DimensionError("majority: tiebreak dimension mismatch");
  if (terms == 0) return tiebreak;
  const int width = std::bit_width(terms);
  const std::size_t threshold = terms / 2;
  const bool even = terms % 2 == 0;
  std::vector<std::uint64_t> cur(2 * terms + 2);
  std::vector<std::uint64_t> next(2 * terms + 2);
  std::vector<std::uint64_t> slice(static_cast<std::size_t>(width) + 1);
  Hypervector out(dim);
  auto ow = out.mutable_words();
  auto tw = tiebreak.words();
  for (std::size_t w = 0; w < ow.size(); ++w) {
    std::size_t n = terms;
    for (std::size_t t = 0; t < terms; ++t) cur[t] = word_at(t, w);
    for (int b = 0; b < width; ++b) {
      // Reduce the weight-2^b bits to one, pushing carries to weight 2^(b+1).
      std::size_t head = 0;
      std::size_t n_next = 0;
      while (n - head >= 3) {
        const std::uint64_t x = cur[head];
        const std::uint64_t y = cur[head + 1];
        const std::uint64_t z = cur[head + 2];
        const std::uint64_t u = x ^ y;
        next[n_next++] = (x & y) | (u & z);
        cur[n++] = u ^ z;
        head += 3;
      }
      if (n - head == 2) {
        const std::uint64_t x = cur[head];
        const std::uint64_t y = cur[head + 1];
        next[n_next++] = x & y;
        slice[static_cast<std::size_t>(b)] = x ^ y;
      } else {
        slice[static_cast<std::size_t>(b)] = n - head == 1 ? cur[head] : 0;
      }
      std::swap(cur, next);
      n = n_next;
    }
    std::uint64_t gt = 0;
    std::uint64_t eq = ~std::uint64_t{0};
    for (int b = width - 1; b >= 0; --b) {
      const std::uint64_t s = slice[static_cast<std::size_t>(b)];
      if ((threshold >> b) & 1U) {
        eq &= s;
      } else {
        gt |= eq & s;
        eq &= ~s;
      }
    }
    ow[w] = even ? (gt | (eq & tw[w])) : gt;
  }
  out.clear_tail();
  return out;
}

}  // namespace detail

// Circular shift: out[(i + k) mod D] = a[i]. Negative k shifts the other way.
inline Hypervector permute(const Hypervector& a, long long k = 1) {
  const auto dim = static_cast<long long>(a.dim());
  if (dim == 0) return a;
  const auto shift = static_cast<std::size_t>(((k % dim) + dim) % dim);
  if (shift == 0) return a;
  Hypervector out(a.dim());
  const std::size_t d = a.dim();
  detail::or_bit_range(out.mutable_words(), shift, a.words(), 0, d - shift);
  detail::or_bit_range(out.mutable_words(), 0, a.words(), d - shift, shift);
  return out;
}

// A seeded uniformly random subset of exactly D/2 indices takes its values
// from `a`, the complement from `b`. The subset is the +1 set of
// random_hypervector(seed, D).
inline Hypervector merge_half(const Hypervector& a, const Hypervector& b, const Seed& seed) {
  require_same_dim(a, b, "merge_half");
  require_even_dim(a.dim(), "merge_half");
  const Hypervector mask = random_hypervector(seed, a.dim());
  Hypervector out(a.dim());
  auto ow = out.mutable_words();
  auto aw = a.words();
  auto bw = b.words();
  auto mw = mask.words();
  for (std::size_t w = 0; w < ow.size(); ++w) ow[w] = (aw[w] & mw[w]) | (bw[w] & ~mw[w]);
  return out;
}

// Majority (bundle then bipolarize) of a set of hypervectors.
inline Hypervector majority(std::span<const Hypervector> vectors, const Hypervector& tiebreak) {
  for (const auto& v : vectors) require_same_dim(v, tiebreak, "majority");
  return detail::majority_of(
      tiebreak.dim(), vectors.size(),
      [&](std::size_t t, std::size_t w) { return vectors[t].words()[w]; }, tiebreak);
}

// Integer accumulator for bundling. Single writer.
class Accumulator {
 public:
  Accumulator() = default;
  explicit Accumulator(std::size_t dim) : counts_(dim, 0) {
    if (dim == 0) throw DimensionError("accumulator dimension must be positive");
  }

  [[nodiscard]] std::size_t dim() const noexcept { return counts_.size(); }
  [[nodiscard]] std::size_t n_bundled() const noexcept { return n_bundled_; }
  [[nodiscard]] std::span<const std::int32_t> counts() const noexcept { return counts_; }

  Accumulator& add(const Hypervector& v) {
    if (v.dim() != counts_.size()) {
      throw DimensionError("bundle: dimension mismatch (" + std::to_string(counts_.size()) +
                           " vs " + std::to_string(v.dim()) + ")");
    }
    auto vw = v.words();
    const std::size_t d = counts_.size();
    for (std::size_t w = 0; w < vw.size(); ++w) {
      const std::uint64_t bits = vw[w];
      const std::size_t base = w * 64;
      const std::size_t n = std::min<std::size_t>(64, d - base);
      for (std::size_t j = 0; j < n; ++j) {
        counts_[base + j] += static_cast<std::int32_t>(((bits >> j) & 1U) * 2) - 1;
      }
    }
    ++n_bundled_;
    return *this;
  }

  [[nodiscard]] Hypervector bipolarize(const Hypervector& tiebreak) const;

 private:
  std::vector<std::int32_t> counts_;
  std::size_t n_bundled_ = 0;
};

// sign(counts[i]); zero counts take the tiebreak element.
inline Hypervector bipolarize(std::span<const std::int32_t> counts, const Hypervector& tiebreak) {
  if (tiebreak.dim() != counts.size()) throw DimensionError("bipolarize: tiebreak dimension mismatch");
  Hypervector out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto c = counts[i];
    out.set_bit(i, c > 0 || (c == 0 && tiebreak.bit(i)));
  }
  return out;
}

inline Hypervector Accumulator::bipolarize(const Hypervector& tiebreak) const {
  return hdemg::bipolarize(counts_, tiebreak);
}

inline Accumulator& bundle(Accumulator& acc, const Hypervector& v) { return acc.add(v); }

inline Hypervector bipolarize(const Accumulator& acc, const Hypervector& tiebreak) {
  return acc.bipolarize(tiebreak);
}

}  // namespace hdemg
