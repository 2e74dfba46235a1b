#pragma once

// Trial persistence, dataset indexing and the synthetic EMG generator.
//
// Trial file (UTF-8, LF line endings), one file per trial:
//
//   # subject: 1
//   # gesture: fist
//   # effort: high
//   # trial: 3
//   # fs: 1000
//   # channels: 64
//   <channels space-separated integers>      one line per sample
//
// Directory layout: subject<k>/<gesture>_<effort>_<trial>.emg

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "hdemg/error.hpp"
#include "hdemg/seed.hpp"
#include "hdemg/sigproc.hpp"
#include "hdemg/types.hpp"

namespace hdemg {

inline constexpr int kTrialsPerCondition = 5;

struct TrialRecord {
  int subject = 1;
  Gesture gesture = Gesture::index_flexion;
  Effort effort = Effort::low;
  int trial = 1;
  RawTrial raw;

  [[nodiscard]] int effort_target() const noexcept { return effort_target_percent(effort); }
  [[nodiscard]] ClassLabel label(bool with_effort) const {
    return ClassLabel{gesture, with_effort ? std::optional<Effort>(effort) : std::nullopt};
  }

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

inline std::filesystem::path trial_relative_path(const TrialRecord& r) {
  return std::filesystem::path("subject" + std::to_string(r.subject)) /
         (std::string(to_string(r.gesture)) + "_" + std::string(to_string(r.effort)) + "_" +
          std::to_string(r.trial) + ".emg");
}

namespace detail {

inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void validate_record(const TrialRecord& r) {
  if (r.subject < 0) throw DataError("trial record: negative subject id");
  if (r.trial < 1 || r.trial > kTrialsPerCondition) {
    throw DataError("trial record: trial index " + std::to_string(r.trial) + " outside 1..5");
  }
  if (!(r.raw.fs > 0.0)) throw DataError("trial record: sample rate must be positive");
  if (r.raw.channels == 0) throw DataError("trial record: no channels");
  if (r.raw.samples.size() % r.raw.channels != 0) {
    throw DataError("trial record: sample buffer does not match channel count");
  }
}

}  // namespace detail

inline std::string format_trial(const TrialRecord& r) {
  detail::validate_record(r);
  std::string out;
  out.reserve(r.raw.samples.size() * 5 + 128);
  out += "# subject: " + std::to_string(r.subject) + "\n";
  out += "# gesture: " + std::string(to_string(r.gesture)) + "\n";
  out += "# effort: " + std::string(to_string(r.effort)) + "\n";
  out += "# trial: " + std::to_string(r.trial) + "\n";
  out += "# fs: " + detail::format_number(r.raw.fs) + "\n";
  out += "# channels: " + std::to_string(r.raw.channels) + "\n";
  const std::size_t n = r.raw.sample_count();
  char buf[16];
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t c = 0; c < r.raw.channels; ++c) {
      if (c != 0) out += ' ';
      auto res = std::to_chars(buf, buf + sizeof buf, r.raw.at(c, t));
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

inline TrialRecord parse_trial(std::string_view text, const std::string& source = "<memory>") {
  auto fail = [&](std::size_t line, const std::string& msg) -> DataError {
    return DataError(source + ":" + std::to_string(line) + ": " + msg);
  };
  TrialRecord r;
  std::map<std::string, std::string, std::less<>> header;
  std::vector<std::int32_t> rows;  // sample-major while parsing
  std::size_t channels = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool in_header = true;
  std::size_t n_rows = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') throw fail(line_no, "CRLF line endings are not supported");
    if (in_header && !line.empty() && line.front() == '#') {
      const auto colon = line.find(':');
      if (colon == std::string_view::npos || line.size() < 2 || line[1] != ' ') {
        throw fail(line_no, "bad header line, expected '# key: value'");
      }
      std::string key(line.substr(2, colon - 2));
      std::string_view value = line.substr(colon + 1);
      while (!value.empty() && value.front() == ' ') value.remove_prefix(1);
      static constexpr std::array<std::string_view, 6> kKeys = {"subject", "gesture", "effort",
                                                                "trial",   "fs",      "channels"};
      if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
        throw fail(line_no, "unknown header key '" + key + "'");
      }
      if (!header.emplace(key, std::string(value)).second) throw fail(line_no, "duplicate header key '" + key + "'");
      continue;
    }
    if (in_header) {
      in_header = false;
      for (std::string_view key : {"subject", "gesture", "effort", "trial", "fs", "channels"}) {
        if (header.find(key) == header.end()) throw fail(line_no, "missing header key '" + std::string(key) + "'");
      }
      auto parse_int = [&](std::string_view key) {
        const std::string& v = header.find(key)->second;
        long long out = 0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || p != v.data() + v.size()) {
          throw fail(line_no, "header '" + std::string(key) + "' is not an integer: '" + v + "'");
        }
        return out;
      };
      r.subject = static_cast<int>(parse_int("subject"));
      r.trial = static_cast<int>(parse_int("trial"));
      const long long ch = parse_int("channels");
      if (ch < 1) throw fail(line_no, "channel count must be positive");
      channels = static_cast<std::size_t>(ch);
      const auto g = parse_gesture(header.find("gesture")->second);
      if (!g) throw fail(line_no, "unknown gesture '" + header.find("gesture")->second + "'");
      r.gesture = *g;
      const auto e = parse_effort(header.find("effort")->second);
      if (!e) throw fail(line_no, "unknown effort '" + header.find("effort")->second + "'");
      r.effort = *e;
      const std::string& fs = header.find("fs")->second;
      double rate = 0;
      auto [p, ec] = std::from_chars(fs.data(), fs.data() + fs.size(), rate);
      if (ec != std::errc() || p != fs.data() + fs.size() || !(rate > 0)) {
        throw fail(line_no, "bad sample rate '" + fs + "'");
      }
      r.raw.fs = rate;
      r.raw.channels = channels;
    }
    if (line.empty()) {
      if (pos >= text.size()) break;
      throw fail(line_no, "empty sample line");
    }
    std::size_t col = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      if (p == end) break;
      std::int32_t v = 0;
      auto [q, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || (q < end && *q != ' ' && *q != '\t')) {
        const char* tok_end = p;
        while (tok_end < end && *tok_end != ' ' && *tok_end != '\t') ++tok_end;
        throw fail(line_no, "non-numeric sample '" + std::string(p, tok_end) + "'");
      }
      rows.push_back(v);
      ++col;
      p = q;
    }
    if (col != channels) {
      throw fail(line_no, "expected " + std::to_string(channels) + " channel columns, found " +
                              std::to_string(col));
    }
    ++n_rows;
  }
  if (in_header) throw fail(line_no, "no sample lines");
  r.raw.samples.assign(rows.size(), 0);
  for (std::size_t t = 0; t < n_rows; ++t) {
    for (std::size_t c = 0; c < channels; ++c) r.raw.samples[c * n_rows + t] = rows[t * channels + c];
  }
  try {
    detail::validate_record(r);
  } catch (const DataError& e) {
    throw DataError(source + ": " + e.what());
  }
  return r;
}

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Metadata implied by the layout, when the path follows it.
inline void check_path_metadata(const std::filesystem::path& path, const TrialRecord& r) {
  const std::string parent = path.parent_path().filename().string();
  if (parent.rfind("subject", 0) == 0 && parent != "subject" + std::to_string(r.subject)) {
    throw DataError(path.string() + ": header subject " + std::to_string(r.subject) +
                    " does not match directory " + parent);
  }
  const std::string stem = path.stem().string();
  const auto last = stem.rfind('_');
  if (last == std::string::npos || last == 0) return;
  const auto mid = stem.rfind('_', last - 1);
  if (mid == std::string::npos) return;
  const bool layout = parse_gesture(stem.substr(0, mid)).has_value() &&
                      parse_effort(stem.substr(mid + 1, last - mid - 1)).has_value();
  const std::string expected = trial_relative_path(r).stem().string();
  if (layout && stem != expected) {
    throw DataError(path.string() + ": header metadata does not match file name (expected " + expected + ")");
  }
}

}  // namespace detail

inline TrialRecord load_trial_file(const std::filesystem::path& path) {
  auto r = parse_trial(detail::read_file(path), path.string());
  detail::check_path_metadata(path, r);
  return r;
}

// Loads one trial file, or every *.emg file below a directory in path order.
inline std::vector<TrialRecord> load_trials(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::is_regular_file(path, ec)) return {load_trial_file(path)};
  if (!fs::is_directory(path, ec)) throw DataError("no such trial file or directory: " + path.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().extension() == ".emg") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<TrialRecord> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_trial_file(f));
  return out;
}

inline void save_trials(std::span<const TrialRecord> records, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::map<std::tuple<int, Gesture, Effort, int>, bool> seen;
  for (const auto& r : records) {
    detail::validate_record(r);
    if (!seen.emplace(std::make_tuple(r.subject, r.gesture, r.effort, r.trial), true).second) {
      throw DataError("save_trials: duplicate record " + trial_relative_path(r).string());
    }
  }
  for (const auto& r : records) {
    const fs::path file = root / trial_relative_path(r);
    std::error_code ec;
    fs::create_directories(file.parent_path(), ec);
    if (ec) throw DataError("cannot create directory " + file.parent_path().string() + ": " + ec.message());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + file.string());
    const std::string text = format_trial(r);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw DataError("failed writing " + file.string());
  }
}

// Indexed view over a set of trials.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<TrialRecord> records) : records_(std::move(records)) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const auto& r = records_[i];
      if (!index_.emplace(key(r.subject, r.gesture, r.effort, r.trial), i).second) {
        throw DataError("dataset: duplicate trial " + trial_relative_path(r).string());
      }
    }
  }

  [[nodiscard]] const std::vector<TrialRecord>& records() const noexcept { return records_; }
  [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }

  [[nodiscard]] std::vector<int> subjects() const {
    std::vector<int> s;
    for (const auto& r : records_) s.push_back(r.subject);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
  }

  [[nodiscard]] std::vector<Gesture> gestures(int subject) const {
    std::vector<Gesture> g;
    for (const auto& r : records_) {
      if (r.subject == subject) g.push_back(r.gesture);
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
  }

  [[nodiscard]] bool has_effort(int subject, Effort e) const {
    return std::any_of(records_.begin(), records_.end(),
                       [&](const TrialRecord& r) { return r.subject == subject && r.effort == e; });
  }

  [[nodiscard]] const TrialRecord* find(int subject, Gesture g, Effort e, int trial) const {
    const auto it = index_.find(key(subject, g, e, trial));
    return it == index_.end() ? nullptr : &records_[it->second];
  }

  [[nodiscard]] const TrialRecord& at(int subject, Gesture g, Effort e, int trial) const {
    const auto* r = find(subject, g, e, trial);
    if (r == nullptr) {
      throw DataError("dataset: missing trial subject" + std::to_string(subject) + "/" +
                      std::string(to_string(g)) + "_" + std::string(to_string(e)) + "_" +
                      std::to_string(trial));
    }
    return *r;
  }

  // FNV-1a over metadata and samples, as 16 hex digits.
  [[nodiscard]] std::string fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
      for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xFF;
        h *= 0x100000001b3ULL;
      }
    };
    for (const auto& [k, i] : index_) {
      const auto& r = records_[i];
      mix(static_cast<std::uint64_t>(r.subject));
      mix(static_cast<std::uint64_t>(r.gesture));
      mix(static_cast<std::uint64_t>(r.effort));
      mix(static_cast<std::uint64_t>(r.trial));
      mix(static_cast<std::uint64_t>(std::llround(r.raw.fs * 1000.0)));
      mix(r.raw.channels);
      for (auto s : r.raw.samples) mix(static_cast<std::uint32_t>(s));
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 0; i < 16; ++i) out[15 - i] = kHex[(h >> (4 * i)) & 0xF];
    return out;
  }

 private:
  using Key = std::tuple<int, Gesture, Effort, int>;
  static Key key(int s, Gesture g, Effort e, int t) { return {s, g, e, t}; }

  std::vector<TrialRecord> records_;
  std::map<Key, std::size_t> index_;
};

// Synthetic EMG. Each gesture drives a sparse primary set of channels with
// per-channel weights; a disjointly drawn recruitment set joins in above
// low effort, so the spatial pattern shifts with effort as well as scaling.
// Samples are zero-mean Gaussian with standard deviation
//   sqrt((envelope * effort * mvc * (weight * jitter))^2 + noise^2),
// rounded to integers.
struct SynthConfig {
  std::uint64_t seed = 1;
  int subjects = 1;
  std::size_t channels = kDefaultChannels;
  double fs = kDefaultSampleRate;
  // Fraction of channels in each gesture's primary pattern.
  double pattern_density = 0.25;
  // Maximum shared fraction of primary channels between two gestures.
  double max_pattern_overlap = 0.5;
  // Fraction of channels recruited additionally as effort rises above low.
  double recruitment_density = 0.125;
  // Weight of a per-subject co-contraction pattern shared by all gestures;
  // the gesture-specific pattern gets 1 - common_activation.
  double common_activation = 0.4;
  std::array<double, kEffortCount> effort_multipliers = {0.25, 0.50, 0.75};
  double mvc_amplitude = 400.0;
  double noise_std = 40.0;
  double ramp_ms = 1000.0;
  // Per-trial uniform relative jitter of channel weights and achieved effort.
  double channel_jitter = 0.3;
  double effort_jitter = 0.08;
  // Slow sinusoidal amplitude modulation per channel (random phase), a
  // stand-in for within-hold nonstationarity.
  double modulation_depth = 0.3;
  double modulation_hz = 0.5;

  void validate() const {
    if (subjects < 1) throw ConfigError("synth: need at least one subject");
    if (channels < 2) throw ConfigError("synth: need at least two channels");
    if (!(fs > 0)) throw ConfigError("synth: sample rate must be positive");
    if (!(pattern_density > 0 && pattern_density <= 1)) throw ConfigError("synth: pattern density must be in (0, 1]");
    if (!(max_pattern_overlap >= 0 && max_pattern_overlap <= 1)) throw ConfigError("synth: overlap bound must be in [0, 1]");
    if (!(recruitment_density >= 0 && recruitment_density + pattern_density <= 1)) {
      throw ConfigError("synth: recruitment density must be >= 0 and fit beside the primary pattern");
    }
    const auto& m = effort_multipliers;
    const bool all_zero = m[0] == 0 && m[1] == 0 && m[2] == 0;
    if (!all_zero && !(m[0] >= 0 && m[0] < m[1] && m[1] < m[2])) {
      throw ConfigError("synth: effort multipliers must be strictly increasing (or all zero)");
    }
    if (!(noise_std >= 0)) throw ConfigError("synth: noise standard deviation must be >= 0");
    if (!(mvc_amplitude >= 0)) throw ConfigError("synth: MVC amplitude must be >= 0");
    if (!(ramp_ms >= 0 && ramp_ms <= kTransitionSeconds * 1000.0)) {
      throw ConfigError("synth: ramp time must lie within the 2 s transition");
    }
    if (!(common_activation >= 0 && common_activation < 1)) throw ConfigError("synth: common activation must be in [0, 1)");
    if (!(channel_jitter >= 0 && channel_jitter < 1)) throw ConfigError("synth: channel jitter must be in [0, 1)");
    if (!(effort_jitter >= 0 && effort_jitter < 1)) throw ConfigError("synth: effort jitter must be in [0, 1)");
    if (!(modulation_depth >= 0 && modulation_depth < 1)) throw ConfigError("synth: modulation depth must be in [0, 1)");
    if (!(modulation_hz >= 0)) throw ConfigError("synth: modulation frequency must be >= 0");
  }
};

struct GesturePattern {
  std::vector<double> primary;    // weight per channel, 0 when inactive
  std::vector<double> recruited;  // weight per channel, 0 when inactive
};

// Per-subject co-contraction weights shared by every gesture.
inline std::vector<double> synth_common_pattern(const SynthConfig& config, int subject) {
  const Seed base = derive(Seed{config.seed, "synth"}, "subject", static_cast<std::uint64_t>(subject));
  const auto n = config.channels;
  const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(config.pattern_density * static_cast<double>(n))));
  const auto order = shuffled_indices(derive(base, "common"), n);
  Rng rng(derive(base, "common-weights"));
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < k; ++i) w[order[i]] = rng.uniform(0.5, 1.0);
  return w;
}

// Seeded per-subject gesture patterns with bounded pairwise primary overlap.
inline std::vector<GesturePattern> synth_patterns(const SynthConfig& config, int subject) {
  config.validate();
  const Seed base = derive(Seed{config.seed, "synth"}, "subject", static_cast<std::uint64_t>(subject));
  const auto n = config.channels;
  const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(config.pattern_density * static_cast<double>(n))));
  const auto k_rec = static_cast<std::size_t>(std::lround(config.recruitment_density * static_cast<double>(n)));
  const auto max_shared = static_cast<std::size_t>(std::floor(config.max_pattern_overlap * static_cast<double>(k)));
  std::vector<std::vector<std::size_t>> sets;
  std::vector<GesturePattern> patterns;
  for (std::size_t g = 0; g < kGestureCount; ++g) {
    std::vector<std::size_t> order;
    bool ok = false;
    for (std::uint64_t attempt = 0; attempt < 10'000 && !ok; ++attempt) {
      order = shuffled_indices(derive(base, "pattern", g * 10'000 + attempt), n);
      std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
      std::sort(chosen.begin(), chosen.end());
      ok = true;
      for (const auto& other : sets) {
        std::vector<std::size_t> common;
        std::set_intersection(chosen.begin(), chosen.end(), other.begin(), other.end(), std::back_inserter(common));
        if (common.size() > max_shared) {
          ok = false;
          break;
        }
      }
      if (ok) sets.push_back(std::move(chosen));
    }
    if (!ok) throw ConfigError("synth: cannot satisfy the pattern overlap bound; lower the density");
    Rng rng(derive(base, "weights", g));
    GesturePattern p{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    for (std::size_t i = 0; i < k; ++i) p.primary[order[i]] = rng.uniform(0.5, 1.0);
    for (std::size_t i = k; i < k + k_rec; ++i) p.recruited[order[i]] = rng.uniform(0.4, 0.8);
    patterns.push_back(std::move(p));
  }
  return patterns;
}

// Activation envelope: ramps up to 1 over the end of the first transition,
// flat during the hold, ramps down at the start of the second transition.
inline double synth_envelope(double t_ms, double ramp_ms) {
  const double on = kTransitionSeconds * 1000.0;
  const double off = (kTransitionSeconds + kHoldSeconds) * 1000.0;
  if (t_ms >= on && t_ms < off) return 1.0;
  if (ramp_ms <= 0) return 0.0;
  if (t_ms < on) return std::clamp((t_ms - (on - ramp_ms)) / ramp_ms, 0.0, 1.0);
  return std::clamp(1.0 - (t_ms - off) / ramp_ms, 0.0, 1.0);
}

// subjects x 9 gestures x 3 efforts x 5 trials, each 8 s.
inline std::vector<TrialRecord> synth_generate(const SynthConfig& config) {
  config.validate();
  const auto n_samples = static_cast<std::size_t>(std::llround(kTrialSeconds * config.fs));
  const double low_m = config.effort_multipliers[0];
  const double span_m = config.effort_multipliers[2] - low_m;
  std::vector<double> envelope(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    envelope[i] = synth_envelope(static_cast<double>(i) * 1000.0 / config.fs, config.ramp_ms);
  }
  std::vector<TrialRecord> out;
  out.reserve(static_cast<std::size_t>(config.subjects) * kGestureCount * kEffortCount * kTrialsPerCondition);
  for (int s = 1; s <= config.subjects; ++s) {
    const auto patterns = synth_patterns(config, s);
    const auto common = synth_common_pattern(config, s);
    const double specific = 1.0 - config.common_activation;
    const Seed base = derive(Seed{config.seed, "synth"}, "subject", static_cast<std::uint64_t>(s));
    for (std::size_t g = 0; g < kGestureCount; ++g) {
      for (std::size_t e = 0; e < kEffortCount; ++e) {
        for (int t = 1; t <= kTrialsPerCondition; ++t) {
          const std::uint64_t idx = (g * kEffortCount + e) * kTrialsPerCondition + static_cast<std::uint64_t>(t);
          Rng rng(derive(base, "trial", idx));
          const double mult = config.effort_multipliers[e] * (1.0 + rng.uniform(-config.effort_jitter, config.effort_jitter));
          // 0 at low effort, 1 at high effort.
          const double recruit = span_m > 0 ? std::clamp((config.effort_multipliers[e] - low_m) / span_m, 0.0, 1.0) : 0.0;
          std::vector<double> amp(config.channels);
          std::vector<double> phase(config.channels);
          for (std::size_t c = 0; c < config.channels; ++c) {
            const double w = specific * (patterns[g].primary[c] + recruit * patterns[g].recruited[c]) +
                             config.common_activation * common[c];
            amp[c] = mult * config.mvc_amplitude * w *
                     (1.0 + rng.uniform(-config.channel_jitter, config.channel_jitter));
            phase[c] = rng.uniform(0.0, 2.0 * std::numbers::pi);
          }
          TrialRecord r;
          r.subject = s;
          r.gesture = kAllGestures[g];
          r.effort = kAllEfforts[e];
          r.trial = t;
          r.raw = RawTrial(config.channels, n_samples, config.fs);
          const double noise2 = config.noise_std * config.noise_std;
          const double omega = 2.0 * std::numbers::pi * config.modulation_hz / config.fs;
          for (std::size_t c = 0; c < config.channels; ++c) {
            auto ch = r.raw.channel(c);
            for (std::size_t i = 0; i < n_samples; ++i) {
              const double mod = 1.0 + config.modulation_depth * std::sin(omega * static_cast<double>(i) + phase[c]);
              const double a = envelope[i] * amp[c] * mod;
              const double sd = std::sqrt(a * a + noise2);
              ch[i] = sd > 0 ? static_cast<std::int32_t>(std::lround(sd * rng.normal())) : 0;
            }
          }
          out.push_back(std::move(r));
        }
      }
    }
  }
  return out;
}

}  // namespace hdemg
