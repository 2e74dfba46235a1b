#pragma once

// Domain vocabulary shared across modules: gestures, effort levels, class
// labels, feature frames and sample ranges.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hdemg/error.hpp"

namespace hdemg {

enum class Gesture : std::uint8_t {
  index_flexion = 0,
  index_extension,
  middle_flexion,
  middle_extension,
  thumb_flexion,
  thumb_extension,
  one,
  two,
  fist,
};

inline constexpr std::size_t kGestureCount = 9;

inline constexpr std::array<Gesture, kGestureCount> kAllGestures = {
    Gesture::index_flexion,  Gesture::index_extension, Gesture::middle_flexion,
    Gesture::middle_extension, Gesture::thumb_flexion,   Gesture::thumb_extension,
    Gesture::one,            Gesture::two,             Gesture::fist,
};

inline constexpr std::array<std::string_view, kGestureCount> kGestureNames = {
    "index_flexion", "index_extension", "middle_flexion", "middle_extension", "thumb_flexion",
    "thumb_extension", "one", "two", "fist",
};

enum class Effort : std::uint8_t { low = 0, medium, high };

inline constexpr std::size_t kEffortCount = 3;
inline constexpr std::array<Effort, kEffortCount> kAllEfforts = {Effort::low, Effort::medium,
                                                                 Effort::high};
inline constexpr std::array<std::string_view, kEffortCount> kEffortNames = {"low", "medium",
                                                                            "high"};

// Target contraction as percent of MVC.
constexpr int effort_target_percent(Effort e) noexcept {
  return 25 * (static_cast<int>(e) + 1);
}

inline std::string_view to_string(Gesture g) { return kGestureNames[static_cast<std::size_t>(g)]; }
inline std::string_view to_string(Effort e) { return kEffortNames[static_cast<std::size_t>(e)]; }

inline std::optional<Gesture> parse_gesture(std::string_view name) {
  for (std::size_t i = 0; i < kGestureCount; ++i) {
    if (kGestureNames[i] == name) return kAllGestures[i];
  }
  return std::nullopt;
}

inline std::optional<Effort> parse_effort(std::string_view name) {
  for (std::size_t i = 0; i < kEffortCount; ++i) {
    if (kEffortNames[i] == name) return kAllEfforts[i];
  }
  return std::nullopt;
}

// A gesture, optionally qualified by effort (gesture+effort models only).
struct ClassLabel {
  Gesture gesture = Gesture::index_flexion;
  std::optional<Effort> effort;

  // Total order used for deterministic tie-breaking: gesture-only labels
  // sort by gesture; qualified labels by (gesture, effort).
  [[nodiscard]] int ordinal() const noexcept {
    const int g = static_cast<int>(gesture);
    return effort ? g * static_cast<int>(kEffortCount) + static_cast<int>(*effort) + 1000 : g;
  }

  [[nodiscard]] ClassLabel gesture_only() const noexcept { return ClassLabel{gesture, std::nullopt}; }

  [[nodiscard]] std::string name() const {
    std::string s(to_string(gesture));
    if (effort) {
      s += '/';
      s += to_string(*effort);
    }
    return s;
  }

  friend bool operator==(const ClassLabel&, const ClassLabel&) = default;
  friend auto operator<=>(const ClassLabel& a, const ClassLabel& b) noexcept {
    return a.ordinal() <=> b.ordinal();
  }
};

// Per-channel feature values for one window.
struct FeatureFrame {
  std::vector<double> values;
  double timestamp_ms = 0.0;
};

// Half-open sample range [begin, end).
struct SampleRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  [[nodiscard]] std::size_t size() const noexcept { return end - begin; }
  [[nodiscard]] bool empty() const noexcept { return end <= begin; }
  friend bool operator==(const SampleRange&, const SampleRange&) = default;
};

}  // namespace hdemg
