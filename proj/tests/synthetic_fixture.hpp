#pragma once

// Lazily generated synthetic datasets shared by the tests of one binary.

#include "hdemg/data.hpp"
#include "hdemg/experiment.hpp"

namespace fixture {

inline const hdemg::Dataset& default_dataset() {
  static const hdemg::Dataset ds(hdemg::synth_generate(hdemg::SynthConfig{}));
  return ds;
}

inline const hdemg::FrameCache& default_frames() {
  static const hdemg::FrameCache cache(default_dataset());
  return cache;
}

// Every stochastic term switched off: patterns and effort levels alone.
inline hdemg::SynthConfig noiseless_config() {
  hdemg::SynthConfig c;
  c.noise_std = 0.0;
  c.channel_jitter = 0.0;
  c.effort_jitter = 0.0;
  c.modulation_depth = 0.0;
  return c;
}

inline const hdemg::Dataset& noiseless_dataset() {
  static const hdemg::Dataset ds(hdemg::synth_generate(noiseless_config()));
  return ds;
}

inline const hdemg::FrameCache& noiseless_frames() {
  static const hdemg::FrameCache cache(noiseless_dataset());
  return cache;
}

}  // namespace fixture
