#pragma once

// Associative memory of labeled prototype hypervectors.
//
// Model file layout (all integers little-endian, reals IEEE-754 binary64):
//
//   "HDAM"                      magic, 4 bytes
//   u32 version                 currently 1
//   u32 D, u32 L, u32 N, u32 channel count
//   u8  mode                    0 gesture-only, 1 gesture+effort
//   u8[3] reserved              zero
//   u64 item-memory seed, u64 level-memory seed, u64 tiebreak seed
//   u32 bounds count            0 (unfitted) or channel count
//   bounds count x (f64 min, f64 max)
//   ceil(D/64) x u64            tiebreak vector words
//   u32 prototype count
//   per prototype:
//     u8 gesture, u8 effort (0xFF when absent), u16 reserved zero,
//     u32 n_trained, ceil(D/64) x u64 words
//
// Item memories are not stored; they are regenerated from the seeds.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hdemg/encoder.hpp"
#include "hdemg/error.hpp"
#include "hdemg/hypervector.hpp"
#include "hdemg/types.hpp"

namespace hdemg {

enum class ModelMode : std::uint8_t { gesture_only = 0, gesture_effort = 1 };

inline std::string_view to_string(ModelMode m) {
  return m == ModelMode::gesture_only ? "gesture-only" : "gesture+effort";
}

struct Prototype {
  ClassLabel label;
  Hypervector vector;
  std::uint32_t n_trained = 0;

  friend bool operator==(const Prototype&, const Prototype&) = default;
};

struct Classification {
  ClassLabel label;
  double similarity = -1.0;
  std::map<ClassLabel, double> all_scores;
};

// Bundle and bipolarize one class's training vectors.
inline Prototype train_class(std::span<const Hypervector> vectors, ClassLabel label,
                             const Hypervector& tiebreak) {
  if (vectors.empty()) throw DataError("train_class: no training vectors for " + label.name());
  Accumulator acc(tiebreak.dim());
  for (const auto& v : vectors) acc.add(v);
  return Prototype{label, acc.bipolarize(tiebreak), static_cast<std::uint32_t>(acc.n_bundled())};
}

// Single accumulator over the vectors of every effort context.
inline Prototype train_multicontext(const std::map<Effort, std::vector<Hypervector>>& per_context,
                                    Gesture gesture, const Hypervector& tiebreak) {
  if (per_context.size() < 2) throw ConfigError("train_multicontext: need at least 2 effort contexts");
  Accumulator acc(tiebreak.dim());
  for (const auto& [effort, vectors] : per_context) {
    if (vectors.empty()) {
      throw DataError("train_multicontext: context " + std::string(to_string(effort)) + " is empty");
    }
    for (const auto& v : vectors) acc.add(v);
  }
  return Prototype{ClassLabel{gesture, std::nullopt}, acc.bipolarize(tiebreak),
                   static_cast<std::uint32_t>(acc.n_bundled())};
}

class AssociativeMemory {
 public:
  AssociativeMemory(EncoderConfig config, const ModelSeeds& seeds, ModelMode mode)
      : config_(std::move(config)), seeds_(seeds), mode_(mode) {
    config_.validate();
    tiebreak_ = random_hypervector(seeds_.tiebreak, config_.dim);
  }

  [[nodiscard]] const EncoderConfig& config() const noexcept { return config_; }
  [[nodiscard]] const ModelSeeds& seeds() const noexcept { return seeds_; }
  [[nodiscard]] ModelMode mode() const noexcept { return mode_; }
  [[nodiscard]] const Hypervector& tiebreak() const noexcept { return tiebreak_; }
  [[nodiscard]] const std::vector<Prototype>& prototypes() const noexcept { return prototypes_; }
  [[nodiscard]] std::size_t size() const noexcept { return prototypes_.size(); }
  [[nodiscard]] bool empty() const noexcept { return prototypes_.empty(); }

  [[nodiscard]] Encoder encoder() const { return Encoder(config_, seeds_); }

  [[nodiscard]] const Prototype* find(const ClassLabel& label) const {
    for (const auto& p : prototypes_) {
      if (p.label == label) return &p;
    }
    return nullptr;
  }

  void insert(Prototype p) {
    if (p.vector.dim() != config_.dim) {
      throw DimensionError("associative memory: prototype dimension " + std::to_string(p.vector.dim()) +
                           " does not match model dimension " + std::to_string(config_.dim));
    }
    if (p.n_trained == 0) throw DataError("associative memory: prototype trained on zero vectors");
    const bool qualified = p.label.effort.has_value();
    if (qualified != (mode_ == ModelMode::gesture_effort)) {
      throw ConfigError("associative memory: label " + p.label.name() + " does not fit " +
                        std::string(to_string(mode_)) + " mode");
    }
    if (find(p.label) != nullptr) throw ConfigError("associative memory: duplicate class " + p.label.name());
    prototypes_.push_back(std::move(p));
  }

  // Nearest prototype by cosine; ties go to the lowest label ordinal.
  [[nodiscard]] Classification classify(const Hypervector& query) const {
    if (prototypes_.empty()) throw ConfigError("classify: associative memory is empty");
    require_same_dim(query, tiebreak_, "classify");
    Classification out;
    bool first = true;
    for (const auto& p : prototypes_) {
      const double s = cosine(query, p.vector);
      out.all_scores.emplace(p.label, s);
      if (first || s > out.similarity || (s == out.similarity && p.label < out.label)) {
        out.label = p.label;
        out.similarity = s;
        first = false;
      }
    }
    return out;
  }

  // Winning (gesture, effort) class projected onto its gesture.
  [[nodiscard]] Classification classify_gesture_only(const Hypervector& query) const {
    if (mode_ != ModelMode::gesture_effort) {
      throw ConfigError("classify_gesture_only: model is not in gesture+effort mode");
    }
    Classification c = classify(query);
    c.label = c.label.gesture_only();
    return c;
  }

  [[nodiscard]] std::vector<std::uint8_t> to_bytes() const;
  static AssociativeMemory from_bytes(std::span<const std::uint8_t> bytes);

  void save(const std::filesystem::path& path) const {
    const auto bytes = to_bytes();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write model file " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing model file " + path.string());
  }

  static AssociativeMemory load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_bytes(bytes);
  }

  friend bool operator==(const AssociativeMemory&, const AssociativeMemory&) = default;

 private:
  EncoderConfig config_;
  ModelSeeds seeds_;
  ModelMode mode_;
  Hypervector tiebreak_;
  std::vector<Prototype> prototypes_;
};

// Per gesture, merge_half of the two parents' prototypes. Both models must be
// gesture-only over the same gestures and share encoder configuration and
// seeds.
inline AssociativeMemory merge_models(const AssociativeMemory& a, const AssociativeMemory& b,
                                      const Seed& seed) {
  if (a.mode() != ModelMode::gesture_only || b.mode() != ModelMode::gesture_only) {
    throw ConfigError("merge_models: both models must be gesture-only");
  }
  if (a.config() != b.config() || a.seeds() != b.seeds()) {
    throw ConfigError("merge_models: models have incompatible encoder configuration or seeds");
  }
  if (a.size() != b.size()) throw ConfigError("merge_models: gesture sets differ");
  AssociativeMemory out(a.config(), a.seeds(), ModelMode::gesture_only);
  for (const auto& pa : a.prototypes()) {
    const Prototype* pb = b.find(pa.label);
    if (pb == nullptr) throw ConfigError("merge_models: gesture sets differ (" + pa.label.name() + ")");
    const auto child = derive(seed, "merge", static_cast<std::uint64_t>(pa.label.gesture));
    // Each half of the merged vector stands for one parent, so record the
    // parents' mean count (rounded up); merging a model with itself is exact.
    const std::uint32_t n = static_cast<std::uint32_t>((std::uint64_t{pa.n_trained} + pb->n_trained + 1) / 2);
    out.insert(Prototype{pa.label, merge_half(pa.vector, pb->vector, child), n});
  }
  return out;
}

// Adds (gesture, effort) classes without touching existing entries. The
// input must be empty or already in gesture+effort mode.
inline AssociativeMemory add_effort_classes(const AssociativeMemory& am,
                                            std::span<const Prototype> prototypes) {
  if (am.mode() != ModelMode::gesture_effort && !am.empty()) {
    throw ConfigError("add_effort_classes: model already holds gesture-only classes");
  }
  AssociativeMemory out(am.config(), am.seeds(), ModelMode::gesture_effort);
  for (const auto& p : am.prototypes()) out.insert(p);
  for (const auto& p : prototypes) {
    if (!p.label.effort) throw ConfigError("add_effort_classes: label " + p.label.name() + " has no effort");
    out.insert(p);
  }
  return out;
}

enum class Aggregation { per_window, majority };

inline std::string_view to_string(Aggregation a) {
  return a == Aggregation::per_window ? "per-window" : "majority";
}

inline std::optional<Aggregation> parse_aggregation(std::string_view s) {
  if (s == "per-window") return Aggregation::per_window;
  if (s == "majority") return Aggregation::majority;
  return std::nullopt;
}

struct TrialResult {
  std::vector<Classification> windows;
  // Modal label over windows, ties to the lowest ordinal.
  ClassLabel majority;
};

// Classifies each window of a trial; `project_gesture` maps gesture+effort
// winners onto gestures before voting.
inline TrialResult classify_trial(const AssociativeMemory& am, std::span<const Hypervector> queries,
                                  bool project_gesture = false) {
  if (queries.empty()) throw DataError("classify_trial: no query windows");
  TrialResult r;
  r.windows.reserve(queries.size());
  std::map<ClassLabel, std::size_t> votes;
  for (const auto& q : queries) {
    r.windows.push_back(project_gesture ? am.classify_gesture_only(q) : am.classify(q));
    ++votes[r.windows.back().label];
  }
  std::size_t best = 0;
  for (const auto& [label, n] : votes) {  // ascending ordinal
    if (n > best) {
      best = n;
      r.majority = label;
    }
  }
  return r;
}

// Fraction of the trial judged correct: window fraction or 0/1 majority.
// Labels compare by gesture only when `gesture_only` is set.
inline double score_trial(const TrialResult& r, const ClassLabel& truth, Aggregation aggregation,
                          bool gesture_only = false) {
  auto match = [&](const ClassLabel& l) {
    return gesture_only ? l.gesture == truth.gesture : l == truth;
  };
  if (aggregation == Aggregation::majority) return match(r.majority) ? 1.0 : 0.0;
  std::size_t ok = 0;
  for (const auto& w : r.windows) ok += match(w.label) ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(r.windows.size());
}

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u64(bits);
  }
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> b) : bytes_(b) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::string raw(std::size_t n) {
    need(n);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  [[nodiscard]] bool at_end() const noexcept { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError("model file truncated at byte " + std::to_string(pos_));
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline constexpr std::string_view kModelMagic = "HDAM";
inline constexpr std::uint32_t kModelVersion = 1;
inline constexpr std::uint8_t kNoEffort = 0xFF;

}  // namespace detail

inline std::vector<std::uint8_t> AssociativeMemory::to_bytes() const {
  detail::ByteWriter w;
  w.raw(detail::kModelMagic);
  w.u32(detail::kModelVersion);
  w.u32(static_cast<std::uint32_t>(config_.dim));
  w.u32(static_cast<std::uint32_t>(config_.levels));
  w.u32(static_cast<std::uint32_t>(config_.ngram));
  w.u32(static_cast<std::uint32_t>(config_.channels));
  w.u8(static_cast<std::uint8_t>(mode_));
  w.u8(0);
  w.u8(0);
  w.u8(0);
  w.u64(seeds_.item_memory.value);
  w.u64(seeds_.level_memory.value);
  w.u64(seeds_.tiebreak.value);
  w.u32(static_cast<std::uint32_t>(config_.bounds.size()));
  for (const auto& b : config_.bounds) {
    w.f64(b.min);
    w.f64(b.max);
  }
  for (auto word : tiebreak_.words()) w.u64(word);
  w.u32(static_cast<std::uint32_t>(prototypes_.size()));
  for (const auto& p : prototypes_) {
    w.u8(static_cast<std::uint8_t>(p.label.gesture));
    w.u8(p.label.effort ? static_cast<std::uint8_t>(*p.label.effort) : detail::kNoEffort);
    w.u16(0);
    w.u32(p.n_trained);
    for (auto word : p.vector.words()) w.u64(word);
  }
  return w.take();
}

inline AssociativeMemory AssociativeMemory::from_bytes(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  if (r.raw(4) != detail::kModelMagic) throw DataError("model file: bad magic");
  if (const auto v = r.u32(); v != detail::kModelVersion) {
    throw DataError("model file: unsupported version " + std::to_string(v));
  }
  EncoderConfig config;
  config.dim = r.u32();
  config.levels = r.u32();
  config.ngram = r.u32();
  config.channels = r.u32();
  const std::uint8_t mode = r.u8();
  if (mode > 1) throw DataError("model file: bad mode byte");
  r.u8();
  r.u8();
  r.u8();
  ModelSeeds seeds;
  seeds.item_memory = Seed{r.u64(), "im"};
  seeds.level_memory = Seed{r.u64(), "cim"};
  seeds.tiebreak = Seed{r.u64(), "tiebreak"};
  const std::uint32_t n_bounds = r.u32();
  if (n_bounds != 0 && n_bounds != config.channels) throw DataError("model file: bad bounds count");
  for (std::uint32_t i = 0; i < n_bounds; ++i) {
    ChannelBounds b;
    b.min = r.f64();
    b.max = r.f64();
    config.bounds.push_back(b);
  }
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  const std::size_t n_words = Hypervector::word_count(config.dim);
  auto read_vector = [&] {
    std::vector<std::uint64_t> words(n_words);
    for (auto& word : words) word = r.u64();
    return Hypervector::from_words(config.dim, std::move(words));
  };
  AssociativeMemory am(std::move(config), seeds, static_cast<ModelMode>(mode));
  am.tiebreak_ = read_vector();
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint8_t g = r.u8();
    const std::uint8_t e = r.u8();
    r.u16();
    const std::uint32_t n_trained = r.u32();
    if (g >= kGestureCount) throw DataError("model file: bad gesture byte");
    if (e != detail::kNoEffort && e >= kEffortCount) throw DataError("model file: bad effort byte");
    ClassLabel label{static_cast<Gesture>(g),
                     e == detail::kNoEffort ? std::nullopt : std::optional<Effort>(static_cast<Effort>(e))};
    Prototype p{label, read_vector(), n_trained};
    try {
      am.insert(std::move(p));
    } catch (const ConfigError& ex) {
      throw DataError(std::string("model file: ") + ex.what());
    }
  }
  if (!r.at_end()) throw DataError("model file: trailing bytes");
  return am;
}

}  // namespace hdemg
