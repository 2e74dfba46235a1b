#pragma once

// Spatiotemporal encoding of multichannel feature frames.
//
// Spatial record: majority over channels of bind(IM[channel], CiM[level]),
// where level quantizes the channel's feature value against per-channel
// bounds. Temporal n-gram: bind over j of permute(spatial[j], N-1-j), so the
// newest frame is unpermuted. Streams slide the n-gram by one frame.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "hdemg/error.hpp"
#include "hdemg/hypervector.hpp"
#include "hdemg/seed.hpp"
#include "hdemg/types.hpp"

namespace hdemg {

struct ChannelBounds {
  double min = 0.0;
  double max = 1.0;
  friend bool operator==(const ChannelBounds&, const ChannelBounds&) = default;
};

struct EncoderConfig {
  std::size_t dim = kDefaultDimension;
  std::size_t levels = 21;
  std::size_t ngram = 5;
  std::size_t channels = 64;
  // Empty until fitted on a training split; encoding requires one entry per
  // channel.
  std::vector<ChannelBounds> bounds;

  void validate() const {
    if (dim < 2 || dim % 2 != 0) throw ConfigError("encoder: dimension must be even and >= 2");
    if (levels < 2) throw ConfigError("encoder: need at least 2 quantization levels");
    if (ngram < 1) throw ConfigError("encoder: n-gram size must be >= 1");
    if (channels < 1) throw ConfigError("encoder: channel count must be >= 1");
    if (!bounds.empty() && bounds.size() != channels) {
      throw ConfigError("encoder: bounds size does not match channel count");
    }
    for (const auto& b : bounds) {
      if (!(b.min < b.max)) throw ConfigError("encoder: channel bounds need min < max");
    }
  }

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

// Seeds of one model's symbol tables and tiebreak vector.
struct ModelSeeds {
  Seed item_memory;
  Seed level_memory;
  Seed tiebreak;

  static ModelSeeds from_root(std::uint64_t root) {
    const Seed base{root, "model"};
    return ModelSeeds{derive(base, "im"), derive(base, "cim"), derive(base, "tiebreak")};
  }

  friend bool operator==(const ModelSeeds&, const ModelSeeds&) = default;
};

class ItemMemory {
 public:
  ItemMemory() = default;
  ItemMemory(const Seed& seed, std::size_t channels, std::size_t dim) : seed_(seed) {
    if (channels < 1) throw ConfigError("item memory: channel count must be >= 1");
    vectors_.reserve(channels);
    for (std::size_t c = 0; c < channels; ++c) vectors_.push_back(random_hypervector(derive(seed, "im", c), dim));
  }

  [[nodiscard]] const Hypervector& operator[](std::size_t c) const { return vectors_.at(c); }
  [[nodiscard]] std::size_t size() const noexcept { return vectors_.size(); }
  [[nodiscard]] const Seed& seed() const noexcept { return seed_; }

 private:
  std::vector<Hypervector> vectors_;
  Seed seed_;
};

// Level hypervectors with cosine(level_i, level_j) = 1 - |i-j|/(L-1): level 0
// is random; each step flips a fresh block of a seeded index permutation,
// D/2 flips in total.
class ContinuousItemMemory {
 public:
  ContinuousItemMemory() = default;
  ContinuousItemMemory(const Seed& seed, std::size_t levels, std::size_t dim) : seed_(seed) {
    if (levels < 2) throw ConfigError("continuous item memory: need at least 2 levels");
    levels_.reserve(levels);
    levels_.push_back(random_hypervector(derive(seed, "cim", 0), dim));
    const auto order = shuffled_indices(derive(seed, "cim-flip", 0), dim);
    const std::size_t steps = levels - 1;
    for (std::size_t i = 1; i < levels; ++i) {
      Hypervector next = levels_.back();
      const std::size_t lo = (i - 1) * dim / (2 * steps);
      const std::size_t hi = i * dim / (2 * steps);
      for (std::size_t p = lo; p < hi; ++p) next.set_bit(order[p], !next.bit(order[p]));
      levels_.push_back(std::move(next));
    }
  }

  [[nodiscard]] const Hypervector& operator[](std::size_t level) const { return levels_.at(level); }
  [[nodiscard]] std::size_t size() const noexcept { return levels_.size(); }
  [[nodiscard]] const Seed& seed() const noexcept { return seed_; }

 private:
  std::vector<Hypervector> levels_;
  Seed seed_;
};

inline std::pair<ItemMemory, ContinuousItemMemory> build_item_memories(const ModelSeeds& seeds,
                                                                       const EncoderConfig& config) {
  config.validate();
  return {ItemMemory(seeds.item_memory, config.channels, config.dim),
          ContinuousItemMemory(seeds.level_memory, config.levels, config.dim)};
}

// floor(((v - min) / (max - min)) * L) after clamping v to [min, max],
// capped at L-1.
inline std::size_t quantize(double value, double min, double max, std::size_t levels) {
  if (!(min < max)) throw ConfigError("quantize: min must be below max");
  if (levels < 1) throw ConfigError("quantize: need at least one level");
  if (std::isnan(value)) throw DataError("quantize: NaN feature value");
  const double v = std::clamp(value, min, max);
  const double scaled = std::floor((v - min) / (max - min) * static_cast<double>(levels));
  return std::min(static_cast<std::size_t>(scaled), levels - 1);
}

// Per-channel min/max over a set of frames. Channels with no spread get a
// unit-width interval starting at their constant value.
class BoundsFitter {
 public:
  explicit BoundsFitter(std::size_t channels)
      : bounds_(channels, ChannelBounds{std::numeric_limits<double>::infinity(),
                                        -std::numeric_limits<double>::infinity()}) {}

  void add(std::span<const FeatureFrame> frames) {
    for (const auto& f : frames) {
      if (f.values.size() != bounds_.size()) throw DataError("bounds: frame channel count mismatch");
      for (std::size_t c = 0; c < bounds_.size(); ++c) {
        bounds_[c].min = std::min(bounds_[c].min, f.values[c]);
        bounds_[c].max = std::max(bounds_[c].max, f.values[c]);
      }
      any_ = true;
    }
  }

  [[nodiscard]] std::vector<ChannelBounds> result() const {
    if (!any_) throw DataError("bounds: no training frames");
    auto out = bounds_;
    for (auto& b : out) {
      if (!(b.max > b.min)) b.max = b.min + 1.0;
    }
    return out;
  }

 private:
  std::vector<ChannelBounds> bounds_;
  bool any_ = false;
};

struct StreamEncoding {
  std::vector<Hypervector> vectors;
  // Set when the stream held fewer frames than the n-gram size.
  bool insufficient_frames = false;
};

class Encoder {
 public:
  Encoder(EncoderConfig config, const ModelSeeds& seeds)
      : config_(std::move(config)), seeds_(seeds) {
    config_.validate();
    std::tie(im_, cim_) = build_item_memories(seeds_, config_);
    tiebreak_ = random_hypervector(seeds_.tiebreak, config_.dim);
  }

  [[nodiscard]] const EncoderConfig& config() const noexcept { return config_; }
  [[nodiscard]] const ModelSeeds& seeds() const noexcept { return seeds_; }
  [[nodiscard]] const ItemMemory& item_memory() const noexcept { return im_; }
  [[nodiscard]] const ContinuousItemMemory& level_memory() const noexcept { return cim_; }
  [[nodiscard]] const Hypervector& tiebreak() const noexcept { return tiebreak_; }

  void set_bounds(std::vector<ChannelBounds> bounds) {
    EncoderConfig next = config_;
    next.bounds = std::move(bounds);
    next.validate();
    config_ = std::move(next);
  }

  [[nodiscard]] std::vector<std::size_t> levels_of(std::span<const double> values) const {
    if (values.size() != config_.channels) {
      throw DataError("encode: frame has " + std::to_string(values.size()) + " channels, expected " +
                      std::to_string(config_.channels));
    }
    if (config_.bounds.size() != config_.channels) {
      throw ConfigError("encode: normalization bounds not fitted");
    }
    std::vector<std::size_t> lv(values.size());
    for (std::size_t c = 0; c < values.size(); ++c) {
      lv[c] = quantize(values[c], config_.bounds[c].min, config_.bounds[c].max, config_.levels);
    }
    return lv;
  }

  // Spatial record from already-quantized channel levels.
  [[nodiscard]] Hypervector encode_levels(std::span<const std::size_t> levels) const {
    if (levels.size() != config_.channels) throw DataError("encode: level count does not match channels");
    for (auto l : levels) {
      if (l >= config_.levels) throw DataError("encode: level index out of range");
    }
    std::vector<const std::uint64_t*> item(levels.size());
    std::vector<const std::uint64_t*> level(levels.size());
    for (std::size_t c = 0; c < levels.size(); ++c) {
      item[c] = im_[c].words().data();
      level[c] = cim_[levels[c]].words().data();
    }
    return detail::majority_of(
        config_.dim, levels.size(),
        [&](std::size_t c, std::size_t w) { return ~(item[c][w] ^ level[c][w]); }, tiebreak_);
  }

  [[nodiscard]] Hypervector encode_spatial(std::span<const double> values) const {
    const auto lv = levels_of(values);
    return encode_levels(lv);
  }
  [[nodiscard]] Hypervector encode_spatial(const FeatureFrame& frame) const {
    return encode_spatial(frame.values);
  }

  [[nodiscard]] Hypervector encode_temporal(std::span<const Hypervector> spatials) const {
    const std::size_t n = config_.ngram;
    if (spatials.size() != n) {
      throw DataError("encode_temporal: expected " + std::to_string(n) + " spatial vectors, got " +
                      std::to_string(spatials.size()));
    }
    Hypervector out = spatials[n - 1];
    if (out.dim() != config_.dim) throw DimensionError("encode_temporal: dimension mismatch");
    for (std::size_t j = 0; j + 1 < n; ++j) {
      out = bind(out, permute(spatials[j], static_cast<long long>(n - 1 - j)));
    }
    return out;
  }

  [[nodiscard]] StreamEncoding encode_stream(std::span<const FeatureFrame> frames) const {
    StreamEncoding result;
    const std::size_t n = config_.ngram;
    if (frames.size() < n) {
      result.insufficient_frames = true;
      return result;
    }
    std::vector<Hypervector> spatial;
    spatial.reserve(frames.size());
    for (const auto& f : frames) spatial.push_back(encode_spatial(f));
    result.vectors.reserve(frames.size() - n + 1);
    for (std::size_t start = 0; start + n <= spatial.size(); ++start) {
      result.vectors.push_back(encode_temporal(std::span<const Hypervector>(spatial).subspan(start, n)));
    }
    return result;
  }

 private:
  EncoderConfig config_;
  ModelSeeds seeds_;
  ItemMemory im_;
  ContinuousItemMemory cim_;
  Hypervector tiebreak_;
};

}  // namespace hdemg
