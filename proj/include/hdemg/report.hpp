#pragma once

// Experiment reports.
//
// Machine format: UTF-8, one JSON object per line.
//   {"record":"header", ...experiment, seed, headline aggregation, metric
//    order, config snapshot...}
//   {"record":"subject", "subject":<id>, "per_window":{...}, "majority":{...}}
//   {"record":"mean", "per_window":{...}, "majority":{...}}
// Object keys are sorted, so identical reports are byte-identical.
//
// Human format: aligned tables (metrics as rows, subjects as columns), one
// per aggregation mode.

#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hdemg/am.hpp"
#include "hdemg/data.hpp"
#include "hdemg/error.hpp"
#include "hdemg/experiment.hpp"

namespace hdemg {

struct ExperimentReport {
  std::string experiment;
  std::uint64_t seed = 0;
  Aggregation headline = Aggregation::per_window;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> metrics;
  std::vector<SubjectResult> subjects;
  std::vector<Accuracy> mean;

  [[nodiscard]] Accuracy mean_of(const std::string& metric) const {
    for (std::size_t i = 0; i < metrics.size(); ++i) {
      if (metrics[i] == metric) return mean[i];
    }
    throw ConfigError("report has no metric " + metric);
  }

  friend bool operator==(const ExperimentReport& a, const ExperimentReport& b) {
    if (a.experiment != b.experiment || a.seed != b.seed || a.headline != b.headline ||
        a.config != b.config || a.metrics != b.metrics || a.mean != b.mean ||
        a.subjects.size() != b.subjects.size()) {
      return false;
    }
    for (std::size_t i = 0; i < a.subjects.size(); ++i) {
      if (a.subjects[i].subject != b.subjects[i].subject || a.subjects[i].values != b.subjects[i].values) {
        return false;
      }
    }
    return true;
  }
};

enum class ReportFormat { table, record };

// Wraps an experiment result with the snapshot needed to reproduce it.
inline ExperimentReport make_report(const ExperimentResult& result, const Dataset& dataset,
                                    const ExperimentOptions& opt) {
  ExperimentReport r;
  r.experiment = result.experiment;
  r.seed = opt.seed;
  r.headline = Aggregation::per_window;
  r.metrics = result.metrics;
  r.subjects = result.subjects;
  r.mean.reserve(result.metrics.size());
  for (const auto& m : result.metrics) r.mean.push_back(result.mean(m));
  auto& c = r.config;
  c["dim"] = opt.dim;
  c["levels"] = opt.levels;
  c["ngram"] = opt.ngram;
  c["seed"] = opt.seed;
  c["channels"] = dataset.size() ? dataset.records().front().raw.channels : 0;
  c["segment"] = "hold";
  c["transition_windows"] = "excluded";
  c["mav_window_samples"] = kMavWindow;
  c["folds"] = kTrialsPerCondition;
  c["dataset"] = {{"trials", dataset.size()}, {"fingerprint", dataset.fingerprint()}};
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : result.parameters) params[k] = v;
  c["parameters"] = params;
  return r;
}

namespace detail {

inline nlohmann::json metric_object(const std::vector<std::string>& metrics, const std::vector<Accuracy>& values,
                                    Aggregation a) {
  nlohmann::json o = nlohmann::json::object();
  for (std::size_t i = 0; i < metrics.size(); ++i) o[metrics[i]] = values[i].get(a);
  return o;
}

inline std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace detail

// The table shows both aggregations unless `only` selects one; the record
// format always carries both.
inline std::string emit_report(const ExperimentReport& r, ReportFormat format,
                               std::optional<Aggregation> only = std::nullopt) {
  if (format == ReportFormat::record) {
    std::string out;
    nlohmann::json header = {{"record", "header"},
                             {"experiment", r.experiment},
                             {"seed", r.seed},
                             {"headline_aggregation", std::string(to_string(r.headline))},
                             {"metrics", r.metrics},
                             {"config", r.config}};
    out += header.dump() + "\n";
    for (const auto& s : r.subjects) {
      nlohmann::json line = {{"record", "subject"},
                             {"subject", s.subject},
                             {"per_window", detail::metric_object(r.metrics, s.values, Aggregation::per_window)},
                             {"majority", detail::metric_object(r.metrics, s.values, Aggregation::majority)}};
      out += line.dump() + "\n";
    }
    nlohmann::json mean = {{"record", "mean"},
                           {"per_window", detail::metric_object(r.metrics, r.mean, Aggregation::per_window)},
                           {"majority", detail::metric_object(r.metrics, r.mean, Aggregation::majority)}};
    out += mean.dump() + "\n";
    return out;
  }

  std::ostringstream os;
  os << "experiment: " << r.experiment << "  seed: " << r.seed
     << "  headline: " << to_string(r.headline) << " (hold segment only)\n";
  if (r.config.contains("parameters") && !r.config["parameters"].empty()) {
    os << "parameters:";
    for (const auto& [k, v] : r.config["parameters"].items()) os << ' ' << k << '=' << v.get<std::string>();
    os << '\n';
  }
  std::size_t name_w = std::string_view("metric").size();
  for (const auto& m : r.metrics) name_w = std::max(name_w, m.size());
  std::vector<std::string> cols;
  for (const auto& s : r.subjects) cols.push_back("subject" + std::to_string(s.subject));
  cols.push_back("mean");
  for (auto agg : {Aggregation::per_window, Aggregation::majority}) {
    if (only && *only != agg) continue;
    os << '\n' << to_string(agg) << " accuracy (%)\n";
    auto pad = [&](const std::string& s, std::size_t w, bool left) {
      return left ? s + std::string(w - std::min(w, s.size()), ' ') : std::string(w - std::min(w, s.size()), ' ') + s;
    };
    std::vector<std::size_t> widths;
    for (const auto& c : cols) widths.push_back(std::max<std::size_t>(c.size(), 6));
    os << pad("metric", name_w, true);
    for (std::size_t j = 0; j < cols.size(); ++j) os << "  " << pad(cols[j], widths[j], false);
    os << '\n';
    for (std::size_t i = 0; i < r.metrics.size(); ++i) {
      os << pad(r.metrics[i], name_w, true);
      for (std::size_t j = 0; j < r.subjects.size(); ++j) {
        os << "  " << pad(detail::fixed2(r.subjects[j].values[i].get(agg)), widths[j], false);
      }
      os << "  " << pad(detail::fixed2(r.mean[i].get(agg)), widths.back(), false) << '\n';
    }
  }
  return os.str();
}

inline ExperimentReport parse_report(std::string_view text) {
  ExperimentReport r;
  bool have_header = false;
  bool have_mean = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto values_of = [&](const nlohmann::json& line) {
    std::vector<Accuracy> v;
    for (const auto& m : r.metrics) {
      v.push_back(Accuracy{line.at("per_window").at(m).get<double>(), line.at("majority").at(m).get<double>()});
    }
    return v;
  };
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (raw.empty()) continue;
    try {
      const auto line = nlohmann::json::parse(raw);
      const auto kind = line.at("record").get<std::string>();
      if (kind == "header") {
        r.experiment = line.at("experiment").get<std::string>();
        r.seed = line.at("seed").get<std::uint64_t>();
        const auto agg = parse_aggregation(line.at("headline_aggregation").get<std::string>());
        if (!agg) throw DataError("bad headline aggregation");
        r.headline = *agg;
        r.metrics = line.at("metrics").get<std::vector<std::string>>();
        r.config = line.at("config");
        have_header = true;
      } else if (!have_header) {
        throw DataError("record before header");
      } else if (kind == "subject") {
        r.subjects.push_back(SubjectResult{line.at("subject").get<int>(), values_of(line)});
      } else if (kind == "mean") {
        r.mean = values_of(line);
        have_mean = true;
      } else {
        throw DataError("unknown record kind '" + kind + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError("report line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("report line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header || !have_mean) throw DataError("report is missing its header or mean record");
  return r;
}

}  // namespace hdemg
