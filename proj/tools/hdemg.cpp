// hdemg: train, merge and evaluate HD gesture classifiers on EMG trials.
//
// Exit codes: 0 success, 2 data error, 3 configuration or usage error,
// 1 anything else.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hdemg/am.hpp"
#include "hdemg/data.hpp"
#include "hdemg/error.hpp"
#include "hdemg/experiment.hpp"
#include "hdemg/report.hpp"

namespace {

using namespace hdemg;

struct Common {
  ExperimentOptions opt;
  std::string data;
  std::string out;
  std::string aggregation;
};

void add_model_flags(CLI::App* app, Common& c) {
  app->add_option("--dim", c.opt.dim, "hypervector dimension")->capture_default_str();
  app->add_option("--levels", c.opt.levels, "quantization levels")->capture_default_str();
  app->add_option("--ngram", c.opt.ngram, "temporal n-gram size")->capture_default_str();
  app->add_option("--seed", c.opt.seed, "root seed")->capture_default_str();
}

// Writes to `path`, or stdout when empty or "-".
void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  f << text;
  f.close();
  if (!f) throw DataError("cannot write " + path);
}

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return detail::read_file(path);
}

Effort effort_arg(const std::string& s) {
  const auto e = parse_effort(s);
  if (!e) throw ConfigError("unknown effort level '" + s + "' (expected low, medium or high)");
  return *e;
}

std::optional<Aggregation> aggregation_arg(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const auto a = parse_aggregation(s);
  if (!a) throw ConfigError("unknown aggregation '" + s + "' (expected per-window or majority)");
  return a;
}

ReportFormat format_arg(const std::string& s) {
  if (s == "table") return ReportFormat::table;
  if (s == "record") return ReportFormat::record;
  throw ConfigError("unknown report format '" + s + "' (expected table or record)");
}

Dataset load_dataset(const std::string& path) {
  if (path.empty()) throw ConfigError("--data is required");
  if (!std::filesystem::exists(path)) throw DataError("no such file or directory: " + path);
  return Dataset(load_trials(path));
}

int cmd_synth(const Common& c, SynthConfig sc) {
  if (c.out.empty()) throw ConfigError("synth: --out directory is required");
  sc.seed = c.opt.seed;
  const auto records = synth_generate(sc);
  save_trials(records, c.out);
  std::cerr << "wrote " << records.size() << " trials to " << c.out << "\n";
  return 0;
}

std::vector<Effort> contexts_arg(const std::string& s) {
  std::vector<Effort> out;
  if (s == "all") return {kAllEfforts.begin(), kAllEfforts.end()};
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = std::min(s.find(',', pos), s.size());
    out.push_back(effort_arg(s.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

int cmd_train(const Common& c, const std::string& effort, const std::string& mode_name, const std::string& fit,
              std::optional<int> subject_arg, const std::vector<int>& trials) {
  if (c.out.empty()) throw ConfigError("train: --out model path is required");
  ModelMode mode;
  if (mode_name == "gesture") {
    mode = ModelMode::gesture_only;
  } else if (mode_name == "gesture-effort") {
    mode = ModelMode::gesture_effort;
  } else {
    throw ConfigError("train: --mode must be gesture or gesture-effort");
  }
  const std::vector<Effort> contexts = contexts_arg(effort);
  if (effort != "all" && contexts.size() != 1) throw ConfigError("train: --effort takes one level or all");
  // Models meant to be merged must share bounds, so fit them over every
  // context involved.
  const std::vector<Effort> fit_contexts = fit.empty() ? contexts : contexts_arg(fit);
  if (mode == ModelMode::gesture_effort && effort != "all") {
    throw ConfigError("train: gesture-effort mode needs --effort all");
  }
  for (int t : trials) {
    if (t < 1 || t > kTrialsPerCondition) throw ConfigError("train: trial index must be in 1..5");
  }

  const Dataset ds = load_dataset(c.data);
  const auto subjects = ds.subjects();
  if (subjects.empty()) throw DataError("train: dataset is empty");
  const int subject = subject_arg.value_or(subjects.front());
  const auto gestures = ds.gestures(subject);
  if (gestures.empty()) throw DataError("train: no trials for subject " + std::to_string(subject));

  FrameCache cache(ds);
  EncoderConfig ec;
  ec.dim = c.opt.dim;
  ec.levels = c.opt.levels;
  ec.ngram = c.opt.ngram;
  ec.channels = detail::channel_count(ds);
  const auto seeds = ModelSeeds::from_root(c.opt.seed);
  Encoder encoder(ec, seeds);
  BoundsFitter fitter(ec.channels);
  for (auto e : fit_contexts) {
    for (auto g : gestures) {
      for (int t : trials) fitter.add(cache.frames(ds.at(subject, g, e, t)));
    }
  }
  encoder.set_bounds(fitter.result());

  auto encode = [&](Gesture g, Effort e) {
    std::vector<Hypervector> out;
    for (int t : trials) {
      auto s = encoder.encode_stream(cache.frames(ds.at(subject, g, e, t)));
      if (s.insufficient_frames) throw DataError("train: trial has fewer hold frames than the n-gram size");
      out.insert(out.end(), s.vectors.begin(), s.vectors.end());
    }
    return out;
  };

  AssociativeMemory am(encoder.config(), seeds, mode);
  if (mode == ModelMode::gesture_effort) {
    std::vector<Prototype> protos;
    for (auto e : contexts) {
      for (auto g : gestures) protos.push_back(train_class(encode(g, e), ClassLabel{g, e}, am.tiebreak()));
    }
    am = add_effort_classes(am, protos);
  } else {
    for (auto g : gestures) {
      std::map<Effort, std::vector<Hypervector>> per_context;
      for (auto e : contexts) per_context[e] = encode(g, e);
      if (contexts.size() == 1) {
        am.insert(train_class(per_context.begin()->second, ClassLabel{g, std::nullopt}, am.tiebreak()));
      } else {
        am.insert(train_multicontext(per_context, g, am.tiebreak()));
      }
    }
  }
  am.save(c.out);
  std::cerr << "trained " << am.size() << " " << to_string(mode) << " prototypes for subject" << subject
            << " -> " << c.out << "\n";
  return 0;
}

int cmd_merge(const Common& c, const std::vector<std::string>& models) {
  if (models.size() != 2) throw ConfigError("merge: pass exactly two --model files");
  if (c.out.empty()) throw ConfigError("merge: --out model path is required");
  const auto a = AssociativeMemory::load(models[0]);
  const auto b = AssociativeMemory::load(models[1]);
  const auto merged = merge_models(a, b, derive(Seed{c.opt.seed, "cli"}, "merge", 0));
  merged.save(c.out);
  std::cerr << "merged " << merged.size() << " prototypes -> " << c.out << "\n";
  return 0;
}

int cmd_classify(const Common& c, const std::vector<std::string>& models, std::optional<int> subject,
                 bool gesture_only) {
  if (models.size() != 1) throw ConfigError("classify: pass exactly one --model file");
  const auto am = AssociativeMemory::load(models.front());
  if (am.config().bounds.empty()) throw DataError("classify: model has no fitted normalization bounds");
  const bool project = gesture_only && am.mode() == ModelMode::gesture_effort;
  if (gesture_only && !project) throw ConfigError("classify: --gesture-only needs a gesture+effort model");
  const auto agg = aggregation_arg(c.aggregation).value_or(Aggregation::per_window);
  const Dataset ds = load_dataset(c.data);
  const Encoder encoder = am.encoder();

  std::ostringstream os;
  os << "trial\ttruth\tpredicted\t" << to_string(agg) << "\n";
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& r : ds.records()) {
    if (subject && r.subject != *subject) continue;
    if (r.raw.channels != am.config().channels) {
      throw DataError("classify: " + trial_relative_path(r).string() + " has " + std::to_string(r.raw.channels) +
                      " channels, model expects " + std::to_string(am.config().channels));
    }
    auto s = encoder.encode_stream(hold_frames(r.raw));
    if (s.insufficient_frames) throw DataError("classify: trial has fewer hold frames than the n-gram size");
    const auto result = classify_trial(am, s.vectors, project);
    const ClassLabel truth = am.mode() == ModelMode::gesture_effort && !project
                                 ? ClassLabel{r.gesture, r.effort}
                                 : ClassLabel{r.gesture, std::nullopt};
    const double score = 100.0 * score_trial(result, truth, agg, project);
    total += score;
    ++n;
    os << trial_relative_path(r).generic_string() << '\t' << truth.name() << '\t' << result.majority.name() << '\t'
       << detail::fixed2(score) << '\n';
  }
  if (n == 0) throw DataError("classify: no trials to classify");
  os << "mean\t\t\t" << detail::fixed2(total / static_cast<double>(n)) << '\n';
  write_output(c.out, os.str());
  return 0;
}

int cmd_eval(const Common& c, const std::string& experiment, const std::string& pair,
             const std::string& context, const std::string& format) {
  const auto fmt = format_arg(format);
  const auto only = aggregation_arg(c.aggregation);
  const Dataset ds = load_dataset(c.data);
  FrameCache cache(ds);
  ExperimentResult result;
  if (experiment == "ctx-pair") {
    const auto comma = pair.find(',');
    if (comma == std::string::npos) throw ConfigError("eval ctx-pair: --pair must look like low,high");
    result = experiment_context_pair(cache, effort_arg(pair.substr(0, comma)), effort_arg(pair.substr(comma + 1)),
                                     c.opt);
  } else if (experiment == "all-ctx") {
    result = experiment_all_contexts(cache, c.opt);
  } else if (experiment == "effort-classes") {
    result = experiment_effort_classes(cache, c.opt);
  } else {
    result = crossval(cache, effort_arg(context), c.opt);
  }
  write_output(c.out, emit_report(make_report(result, ds, c.opt), fmt, only));
  return 0;
}

int cmd_report(const Common& c, const std::string& input, const std::string& format) {
  const auto report = parse_report(read_input(input));
  write_output(c.out, emit_report(report, format_arg(format), aggregation_arg(c.aggregation)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperdimensional EMG gesture classification across effort levels"};
  app.require_subcommand(1);
  Common c;
  int rc = 0;

  SynthConfig sc;
  auto* synth = app.add_subcommand("synth", "generate a synthetic trial dataset");
  synth->add_option("--out", c.out, "output directory")->required();
  synth->add_option("--seed", c.opt.seed, "generator seed")->capture_default_str();
  synth->add_option("--subjects", sc.subjects, "number of subjects")->capture_default_str();
  synth->add_option("--channels", sc.channels, "electrode channels")->capture_default_str();
  synth->add_option("--noise", sc.noise_std, "additive noise standard deviation")->capture_default_str();
  synth->add_option("--common", sc.common_activation, "shared co-contraction weight")->capture_default_str();
  synth->callback([&] { rc = cmd_synth(c, sc); });

  std::string effort = "low";
  std::string mode = "gesture";
  std::string fit;
  std::optional<int> subject;
  std::vector<int> trials = {1};
  auto* train = app.add_subcommand("train", "train a model from one subject's trials");
  add_model_flags(train, c);
  train->add_option("--data", c.data, "trial file or directory")->required();
  train->add_option("--out", c.out, "model file to write")->required();
  train->add_option("--effort", effort, "low, medium, high or all")->capture_default_str();
  train->add_option("--mode", mode, "gesture or gesture-effort")->capture_default_str();
  train->add_option("--fit", fit, "contexts for normalization bounds, e.g. low,high (default: --effort)");
  train->add_option("--subject", subject, "subject id (default: lowest)");
  train->add_option("--trial", trials, "training trial indices")->delimiter(',')->capture_default_str();
  train->callback([&] { rc = cmd_train(c, effort, mode, fit, subject, trials); });

  std::vector<std::string> models;
  auto* merge = app.add_subcommand("merge", "merge two gesture-only models by random halves");
  merge->add_option("--model", models, "the two models to merge (repeat the flag)")->required();
  merge->add_option("--seed", c.opt.seed, "merge mask seed")->capture_default_str();
  merge->add_option("--out", c.out, "merged model file")->required();
  merge->callback([&] { rc = cmd_merge(c, models); });

  bool gesture_only = false;
  auto* classify = app.add_subcommand("classify", "classify trials with a saved model");
  classify->add_option("--model", models, "model file")->required();
  classify->add_option("--data", c.data, "trial file or directory")->required();
  classify->add_option("--subject", subject, "only this subject's trials");
  classify->add_option("--aggregation", c.aggregation, "per-window (default) or majority");
  classify->add_flag("--gesture-only", gesture_only, "project gesture+effort predictions onto gestures");
  classify->add_option("--out", c.out, "output file (default stdout)");
  classify->callback([&] { rc = cmd_classify(c, models, subject, gesture_only); });

  std::string pair = "low,high";
  std::string context = "low";
  std::string format = "record";
  auto* eval = app.add_subcommand("eval", "run an effort-context experiment");
  eval->require_subcommand(1);
  auto add_eval = [&](const std::string& name, const std::string& help) {
    auto* sub = eval->add_subcommand(name, help);
    add_model_flags(sub, c);
    sub->add_option("--data", c.data, "trial directory")->required();
    sub->add_option("--out", c.out, "report file (default stdout)");
    sub->add_option("--format", format, "record or table")->capture_default_str();
    sub->add_option("--aggregation", c.aggregation, "restrict table to per-window or majority");
    sub->callback([&, name] { rc = cmd_eval(c, name, pair, context, format); });
    return sub;
  };
  add_eval("ctx-pair", "single-context models, their merge, six accuracies")
      ->add_option("--pair", pair, "two effort levels, e.g. low,high")
      ->capture_default_str();
  add_eval("all-ctx", "one model accumulated over all three contexts");
  add_eval("effort-classes", "27-class gesture+effort model, joint and projected accuracy");
  add_eval("crossval", "within-context cross-validation")
      ->add_option("--effort", context, "context to evaluate")
      ->capture_default_str();

  std::string input;
  auto* report = app.add_subcommand("report", "render a machine report");
  report->add_option("input", input, "report file (default stdin)");
  report->add_option("--format", format, "table or record")->capture_default_str();
  report->add_option("--aggregation", c.aggregation, "restrict table to per-window or majority");
  report->add_option("--out", c.out, "output file (default stdout)");
  report->callback([&] { rc = cmd_report(c, input, format); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  } catch (const DataError& e) {
    std::cerr << "hdemg: data error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "hdemg: config error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "hdemg: error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
