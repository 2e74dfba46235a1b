#pragma once

// Effort-context experiments over a trial dataset.
//
// Protocol: per subject, five folds; fold k trains on trial k of every
// gesture and tests on the remaining four trials. Only hold-segment frames
// are used. Normalization bounds are fitted per fold on the union of the
// fold's training trials across every context the experiment trains on, so
// all models within a fold share one encoding and can be merged.
// Accuracies are tallied as integer counts, which makes fold order
// irrelevant to the result.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hdemg/am.hpp"
#include "hdemg/data.hpp"
#include "hdemg/encoder.hpp"
#include "hdemg/error.hpp"
#include "hdemg/sigproc.hpp"
#include "hdemg/types.hpp"

namespace hdemg {

struct ExperimentOptions {
  std::size_t dim = kDefaultDimension;
  std::size_t levels = 21;
  std::size_t ngram = 5;
  std::uint64_t seed = 1;
};

// Percent correct under both aggregation modes.
struct Accuracy {
  double per_window = 0.0;
  double majority = 0.0;

  [[nodiscard]] double get(Aggregation a) const noexcept {
    return a == Aggregation::per_window ? per_window : majority;
  }
  friend bool operator==(const Accuracy&, const Accuracy&) = default;
};

struct Tally {
  std::uint64_t windows_correct = 0;
  std::uint64_t windows_total = 0;
  std::uint64_t trials_correct = 0;
  std::uint64_t trials_total = 0;

  void add(const TrialResult& r, const ClassLabel& truth, bool gesture_only) {
    auto match = [&](const ClassLabel& l) { return gesture_only ? l.gesture == truth.gesture : l == truth; };
    for (const auto& w : r.windows) windows_correct += match(w.label) ? 1 : 0;
    windows_total += r.windows.size();
    trials_correct += match(r.majority) ? 1 : 0;
    trials_total += 1;
  }
  Tally& operator+=(const Tally& o) {
    windows_correct += o.windows_correct;
    windows_total += o.windows_total;
    trials_correct += o.trials_correct;
    trials_total += o.trials_total;
    return *this;
  }
  [[nodiscard]] Accuracy accuracy() const {
    if (windows_total == 0 || trials_total == 0) throw DataError("no test windows were evaluated");
    return Accuracy{100.0 * static_cast<double>(windows_correct) / static_cast<double>(windows_total),
                    100.0 * static_cast<double>(trials_correct) / static_cast<double>(trials_total)};
  }
  friend bool operator==(const Tally&, const Tally&) = default;
};

struct SubjectResult {
  int subject = 0;
  std::vector<Accuracy> values;  // parallel to ExperimentResult::metrics
};

struct ExperimentResult {
  std::string experiment;
  std::vector<std::string> metrics;
  std::vector<SubjectResult> subjects;
  std::map<std::string, std::string> parameters;

  [[nodiscard]] std::size_t metric_index(const std::string& name) const {
    for (std::size_t i = 0; i < metrics.size(); ++i) {
      if (metrics[i] == name) return i;
    }
    throw ConfigError("unknown metric " + name);
  }

  // Mean over subjects.
  [[nodiscard]] Accuracy mean(const std::string& name) const {
    const std::size_t i = metric_index(name);
    Accuracy m;
    for (const auto& s : subjects) {
      m.per_window += s.values[i].per_window;
      m.majority += s.values[i].majority;
    }
    const auto n = static_cast<double>(subjects.size());
    return Accuracy{m.per_window / n, m.majority / n};
  }
};

// Hold-segment MAV frames for every trial, computed once.
class FrameCache {
 public:
  explicit FrameCache(const Dataset& dataset) : dataset_(&dataset) {
    frames_.reserve(dataset.size());
    for (const auto& r : dataset.records()) frames_.push_back(hold_frames(r.raw));
  }

  [[nodiscard]] const Dataset& dataset() const noexcept { return *dataset_; }

  [[nodiscard]] const std::vector<FeatureFrame>& frames(const TrialRecord& r) const {
    return frames_[static_cast<std::size_t>(&r - dataset_->records().data())];
  }

 private:
  const Dataset* dataset_;
  std::vector<std::vector<FeatureFrame>> frames_;
};

namespace detail {

inline void require_trials(const Dataset& ds, int subject, std::span<const Gesture> gestures,
                           std::span<const Effort> efforts) {
  for (auto e : efforts) {
    if (!ds.has_effort(subject, e)) {
      throw DataError("subject " + std::to_string(subject) + " has no " + std::string(to_string(e)) +
                      " effort trials");
    }
    for (auto g : gestures) {
      for (int t = 1; t <= kTrialsPerCondition; ++t) (void)ds.at(subject, g, e, t);
    }
  }
}

// Symbol tables built once per experiment; bounds swapped per fold.
class FoldEncoder {
 public:
  FoldEncoder(const FrameCache& cache, const ExperimentOptions& opt, std::size_t channels)
      : cache_(&cache), base_(make_config(opt, channels), ModelSeeds::from_root(opt.seed)) {}

  // Fits bounds on trial `train_trial` of each gesture and context.
  void fit(int subject, std::span<const Gesture> gestures, std::span<const Effort> contexts, int train_trial) {
    BoundsFitter fitter(base_.config().channels);
    for (auto e : contexts) {
      for (auto g : gestures) fitter.add(cache_->frames(cache_->dataset().at(subject, g, e, train_trial)));
    }
    // Item memories stay; only the quantization bounds change.
    fitted_.emplace(base_);
    fitted_->set_bounds(fitter.result());
  }

  [[nodiscard]] const Encoder& encoder() const { return *fitted_; }

  [[nodiscard]] std::vector<Hypervector> encode(int subject, Gesture g, Effort e, int trial) const {
    auto enc = fitted_->encode_stream(cache_->frames(cache_->dataset().at(subject, g, e, trial)));
    if (enc.insufficient_frames) {
      throw DataError("trial has fewer hold frames than the n-gram size");
    }
    return std::move(enc.vectors);
  }

  [[nodiscard]] AssociativeMemory empty_model(ModelMode mode) const {
    return AssociativeMemory(fitted_->config(), base_.seeds(), mode);
  }

 private:
  static EncoderConfig make_config(const ExperimentOptions& opt, std::size_t channels) {
    EncoderConfig c;
    c.dim = opt.dim;
    c.levels = opt.levels;
    c.ngram = opt.ngram;
    c.channels = channels;
    return c;
  }

  const FrameCache* cache_;
  Encoder base_;
  std::optional<Encoder> fitted_;
};

inline std::size_t channel_count(const Dataset& ds) {
  if (ds.size() == 0) throw DataError("dataset is empty");
  return ds.records().front().raw.channels;
}

inline ExperimentResult run_per_subject(
    const Dataset& ds, std::string name, std::vector<std::string> metrics,
    const std::function<std::vector<Tally>(int subject)>& per_subject) {
  ExperimentResult out;
  out.experiment = std::move(name);
  out.metrics = std::move(metrics);
  for (int s : ds.subjects()) {
    const auto tallies = per_subject(s);
    SubjectResult sr{s, {}};
    for (const auto& t : tallies) sr.values.push_back(t.accuracy());
    out.subjects.push_back(std::move(sr));
  }
  if (out.subjects.empty()) throw DataError("dataset has no subjects");
  return out;
}

inline Seed merge_seed(std::uint64_t seed, int subject, int fold) {
  return derive(derive(Seed{seed, "experiment"}, "merge", static_cast<std::uint64_t>(subject)), "fold",
                static_cast<std::uint64_t>(fold));
}

}  // namespace detail

// Within-context cross-validation: single metric "<ctx>_on_<ctx>".
inline ExperimentResult crossval(const FrameCache& cache, Effort context, const ExperimentOptions& opt) {
  const Dataset& ds = cache.dataset();
  detail::FoldEncoder fe(cache, opt, detail::channel_count(ds));
  const std::string c(to_string(context));
  auto r = detail::run_per_subject(ds, "crossval", {c + "_on_" + c}, [&](int subject) {
    const auto gestures = ds.gestures(subject);
    const std::array<Effort, 1> ctx = {context};
    detail::require_trials(ds, subject, gestures, ctx);
    Tally tally;
    for (int k = 1; k <= kTrialsPerCondition; ++k) {
      fe.fit(subject, gestures, ctx, k);
      auto am = fe.empty_model(ModelMode::gesture_only);
      for (auto g : gestures) {
        am.insert(train_class(fe.encode(subject, g, context, k), ClassLabel{g, std::nullopt}, am.tiebreak()));
      }
      for (auto g : gestures) {
        for (int t = 1; t <= kTrialsPerCondition; ++t) {
          if (t == k) continue;
          tally.add(classify_trial(am, fe.encode(subject, g, context, t)), ClassLabel{g, std::nullopt}, false);
        }
      }
    }
    return std::vector<Tally>{tally};
  });
  r.parameters["context"] = c;
  return r;
}

inline const std::vector<std::string>& context_pair_metrics() {
  static const std::vector<std::string> m = {"A_on_A", "A_on_B", "B_on_B", "B_on_A", "merged_on_A", "merged_on_B"};
  return m;
}

// Two single-context models, their random-half merge, and all six
// model-on-context accuracies.
inline ExperimentResult experiment_context_pair(const FrameCache& cache, Effort a, Effort b,
                                                const ExperimentOptions& opt) {
  const Dataset& ds = cache.dataset();
  detail::FoldEncoder fe(cache, opt, detail::channel_count(ds));
  auto r = detail::run_per_subject(ds, "ctx-pair", context_pair_metrics(), [&](int subject) {
    const auto gestures = ds.gestures(subject);
    std::vector<Effort> ctx = {a};
    if (b != a) ctx.push_back(b);
    detail::require_trials(ds, subject, gestures, ctx);
    std::vector<Tally> tallies(6);
    for (int k = 1; k <= kTrialsPerCondition; ++k) {
      fe.fit(subject, gestures, ctx, k);
      auto model_a = fe.empty_model(ModelMode::gesture_only);
      auto model_b = fe.empty_model(ModelMode::gesture_only);
      for (auto g : gestures) {
        const ClassLabel label{g, std::nullopt};
        model_a.insert(train_class(fe.encode(subject, g, a, k), label, model_a.tiebreak()));
        model_b.insert(train_class(fe.encode(subject, g, b, k), label, model_b.tiebreak()));
      }
      const auto merged = merge_models(model_a, model_b, detail::merge_seed(opt.seed, subject, k));
      for (auto g : gestures) {
        const ClassLabel label{g, std::nullopt};
        for (int t = 1; t <= kTrialsPerCondition; ++t) {
          if (t == k) continue;
          const auto qa = fe.encode(subject, g, a, t);
          const auto qb = fe.encode(subject, g, b, t);
          tallies[0].add(classify_trial(model_a, qa), label, false);
          tallies[1].add(classify_trial(model_a, qb), label, false);
          tallies[2].add(classify_trial(model_b, qb), label, false);
          tallies[3].add(classify_trial(model_b, qa), label, false);
          tallies[4].add(classify_trial(merged, qa), label, false);
          tallies[5].add(classify_trial(merged, qb), label, false);
        }
      }
    }
    return tallies;
  });
  r.parameters["A"] = std::string(to_string(a));
  r.parameters["B"] = std::string(to_string(b));
  return r;
}

// One model per fold trained on all three contexts through a shared
// accumulator; metric "all_on_<ctx>" per context.
inline ExperimentResult experiment_all_contexts(const FrameCache& cache, const ExperimentOptions& opt) {
  const Dataset& ds = cache.dataset();
  detail::FoldEncoder fe(cache, opt, detail::channel_count(ds));
  std::vector<std::string> metrics;
  for (auto e : kAllEfforts) metrics.push_back("all_on_" + std::string(to_string(e)));
  return detail::run_per_subject(ds, "all-ctx", metrics, [&](int subject) {
    const auto gestures = ds.gestures(subject);
    detail::require_trials(ds, subject, gestures, kAllEfforts);
    std::vector<Tally> tallies(kEffortCount);
    for (int k = 1; k <= kTrialsPerCondition; ++k) {
      fe.fit(subject, gestures, kAllEfforts, k);
      auto am = fe.empty_model(ModelMode::gesture_only);
      for (auto g : gestures) {
        std::map<Effort, std::vector<Hypervector>> per_context;
        for (auto e : kAllEfforts) per_context[e] = fe.encode(subject, g, e, k);
        am.insert(train_multicontext(per_context, g, am.tiebreak()));
      }
      for (std::size_t ei = 0; ei < kEffortCount; ++ei) {
        for (auto g : gestures) {
          for (int t = 1; t <= kTrialsPerCondition; ++t) {
            if (t == k) continue;
            tallies[ei].add(classify_trial(am, fe.encode(subject, g, kAllEfforts[ei], t)),
                            ClassLabel{g, std::nullopt}, false);
          }
        }
      }
    }
    return tallies;
  });
}

// 27-class gesture+effort model. Metrics: "joint" and "gesture_projected"
// pooled over contexts, then both per context.
inline ExperimentResult experiment_effort_classes(const FrameCache& cache, const ExperimentOptions& opt) {
  const Dataset& ds = cache.dataset();
  detail::FoldEncoder fe(cache, opt, detail::channel_count(ds));
  std::vector<std::string> metrics = {"joint", "gesture_projected"};
  for (auto e : kAllEfforts) metrics.push_back("joint_on_" + std::string(to_string(e)));
  for (auto e : kAllEfforts) metrics.push_back("gesture_projected_on_" + std::string(to_string(e)));
  return detail::run_per_subject(ds, "effort-classes", metrics, [&](int subject) {
    const auto gestures = ds.gestures(subject);
    detail::require_trials(ds, subject, gestures, kAllEfforts);
    std::vector<Tally> tallies(2 + 2 * kEffortCount);
    for (int k = 1; k <= kTrialsPerCondition; ++k) {
      fe.fit(subject, gestures, kAllEfforts, k);
      const auto empty = fe.empty_model(ModelMode::gesture_effort);
      std::vector<Prototype> protos;
      for (auto e : kAllEfforts) {
        for (auto g : gestures) {
          protos.push_back(train_class(fe.encode(subject, g, e, k), ClassLabel{g, e}, empty.tiebreak()));
        }
      }
      const auto am = add_effort_classes(empty, protos);
      for (std::size_t ei = 0; ei < kEffortCount; ++ei) {
        const Effort e = kAllEfforts[ei];
        for (auto g : gestures) {
          for (int t = 1; t <= kTrialsPerCondition; ++t) {
            if (t == k) continue;
            const auto q = fe.encode(subject, g, e, t);
            const ClassLabel truth{g, e};
            const auto joint = classify_trial(am, q, false);
            const auto projected = classify_trial(am, q, true);
            tallies[0].add(joint, truth, false);
            tallies[1].add(projected, truth, true);
            tallies[2 + ei].add(joint, truth, false);
            tallies[2 + kEffortCount + ei].add(projected, truth, true);
          }
        }
      }
    }
    return tallies;
  });
}

}  // namespace hdemg
