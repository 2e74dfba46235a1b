#pragma once

// Raw-signal feature extraction and effort measurement.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hdemg/error.hpp"
#include "hdemg/types.hpp"

namespace hdemg {

inline constexpr double kDefaultSampleRate = 1000.0;
inline constexpr std::size_t kDefaultChannels = 64;
inline constexpr double kTrialSeconds = 8.0;
inline constexpr double kTransitionSeconds = 2.0;
inline constexpr double kHoldSeconds = 4.0;
inline constexpr std::size_t kMavWindow = 50;

// Multichannel recording, channel-major: sample t of channel c is
// samples[c * sample_count + t].
struct RawTrial {
  std::size_t channels = 0;
  double fs = kDefaultSampleRate;
  std::vector<std::int32_t> samples;

  RawTrial() = default;
  RawTrial(std::size_t channel_count, std::size_t sample_count, double rate = kDefaultSampleRate)
      : channels(channel_count), fs(rate), samples(channel_count * sample_count, 0) {}

  [[nodiscard]] std::size_t sample_count() const noexcept {
    return channels == 0 ? 0 : samples.size() / channels;
  }
  [[nodiscard]] std::span<const std::int32_t> channel(std::size_t c) const {
    return std::span<const std::int32_t>(samples).subspan(c * sample_count(), sample_count());
  }
  [[nodiscard]] std::span<std::int32_t> channel(std::size_t c) {
    return std::span<std::int32_t>(samples).subspan(c * sample_count(), sample_count());
  }
  std::int32_t& at(std::size_t c, std::size_t t) { return samples[c * sample_count() + t]; }
  [[nodiscard]] std::int32_t at(std::size_t c, std::size_t t) const {
    return samples[c * sample_count() + t];
  }

  friend bool operator==(const RawTrial&, const RawTrial&) = default;
};

// Per-channel mean absolute value over non-overlapping windows within
// `span`. A trailing partial window is discarded.
inline std::vector<FeatureFrame> mav_frames(const RawTrial& trial, SampleRange span,
                                            std::size_t window = kMavWindow) {
  if (trial.channels == 0 || trial.sample_count() == 0) throw DataError("mav_frames: empty trial");
  if (window == 0) throw ConfigError("mav_frames: window must be positive");
  if (span.end > trial.sample_count() || span.begin > span.end) {
    throw DataError("mav_frames: span outside trial");
  }
  const std::size_t n_frames = span.size() / window;
  std::vector<FeatureFrame> frames(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t start = span.begin + f * window;
    frames[f].values.resize(trial.channels);
    frames[f].timestamp_ms = static_cast<double>(start) * 1000.0 / trial.fs;
    for (std::size_t c = 0; c < trial.channels; ++c) {
      auto ch = trial.channel(c);
      std::int64_t sum = 0;
      for (std::size_t t = start; t < start + window; ++t) sum += std::abs(static_cast<std::int64_t>(ch[t]));
      frames[f].values[c] = static_cast<double>(sum) / static_cast<double>(window);
    }
  }
  return frames;
}

inline std::vector<FeatureFrame> mav_frames(const RawTrial& trial, std::size_t window = kMavWindow) {
  return mav_frames(trial, SampleRange{0, trial.sample_count()}, window);
}

// Sliding RMS over one channel; stride = window - overlap. Returns an empty
// sequence when the signal is shorter than one window.
template <typename T>
std::vector<double> windowed_rms(std::span<const T> signal, double fs = kDefaultSampleRate,
                                 double window_ms = 200.0, double overlap_ms = 150.0) {
  if (!(window_ms > overlap_ms) || overlap_ms < 0.0 || fs <= 0.0) {
    throw ConfigError("windowed_rms: need fs > 0 and window > overlap >= 0");
  }
  const auto window = static_cast<std::size_t>(std::llround(window_ms * fs / 1000.0));
  const auto stride = static_cast<std::size_t>(std::llround((window_ms - overlap_ms) * fs / 1000.0));
  std::vector<double> out;
  if (window == 0 || stride == 0 || signal.size() < window) return out;
  out.reserve((signal.size() - window) / stride + 1);
  for (std::size_t start = 0; start + window <= signal.size(); start += stride) {
    double acc = 0.0;
    for (std::size_t t = start; t < start + window; ++t) {
      const auto x = static_cast<double>(signal[t]);
      acc += x * x;
    }
    out.push_back(std::sqrt(acc / static_cast<double>(window)));
  }
  return out;
}

// Mean over channels of the mean squared amplitude over `span`.
inline double mean_energy(const RawTrial& trial, SampleRange span) {
  if (span.empty()) throw DataError("mean_energy: empty span");
  if (span.end > trial.sample_count()) throw DataError("mean_energy: span outside trial");
  if (trial.channels == 0) throw DataError("mean_energy: trial has no channels");
  double total = 0.0;
  for (std::size_t c = 0; c < trial.channels; ++c) {
    auto ch = trial.channel(c);
    double acc = 0.0;
    for (std::size_t t = span.begin; t < span.end; ++t) {
      const auto x = static_cast<double>(ch[t]);
      acc += x * x;
    }
    total += acc / static_cast<double>(span.size());
  }
  return total / static_cast<double>(trial.channels);
}

// Affine map of signal energy onto the 0..100 effort scale.
struct EffortCalibration {
  double gain = 1.0;
  double offset = 0.0;

  [[nodiscard]] double operator()(double energy) const noexcept { return gain * energy + offset; }
};

inline EffortCalibration calibrate(double rest_energy, double mvc_energy) {
  if (!(mvc_energy > rest_energy)) {
    throw ConfigError("calibrate: MVC energy must exceed rest energy");
  }
  const double gain = 100.0 / (mvc_energy - rest_energy);
  return EffortCalibration{gain, -gain * rest_energy};
}

struct TrialSegments {
  SampleRange transition_in;
  SampleRange hold;
  SampleRange transition_out;
};

// 2 s transition, 4 s hold, 2 s transition.
inline TrialSegments segment(const RawTrial& trial) {
  const auto expected = static_cast<std::size_t>(std::llround(kTrialSeconds * trial.fs));
  if (trial.sample_count() != expected) {
    throw DataError("segment: expected " + std::to_string(expected) + " samples (8 s at " +
                    std::to_string(trial.fs) + " S/s), got " + std::to_string(trial.sample_count()));
  }
  const auto t_in = static_cast<std::size_t>(std::llround(kTransitionSeconds * trial.fs));
  const auto t_hold = static_cast<std::size_t>(std::llround((kTransitionSeconds + kHoldSeconds) * trial.fs));
  return TrialSegments{{0, t_in}, {t_in, t_hold}, {t_hold, expected}};
}

// MAV frames of the hold segment, the only portion used for training and
// inference.
inline std::vector<FeatureFrame> hold_frames(const RawTrial& trial, std::size_t window = kMavWindow) {
  return mav_frames(trial, segment(trial).hold, window);
}

}  // namespace hdemg
