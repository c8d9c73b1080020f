// Copyright 2026 The kpm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kpm/report.h"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "kpm/csv.h"
#include "kpm/errors.h"

namespace kpm {
namespace {

nlohmann::json Nullable(const std::optional<double>& v) {
  if (!v) return nullptr;
  return *v;
}

// JSON has no infinities; thresholds are stored as text.
nlohmann::json Threshold(const std::optional<double>& v) {
  if (!v) return nullptr;
  return FormatDouble(*v);
}

std::optional<double> ThresholdFrom(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  if (j.is_number()) return j.get<double>();
  auto v = ParseDouble(j.get<std::string>());
  if (!v || std::isnan(*v)) throw ValidationError("bad threshold in manifest");
  return v;
}

std::string Cell(const std::optional<double>& v) {
  if (!v) return "-";
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << *v;
  return out.str();
}

}  // namespace

std::string FormatOptional(const std::optional<double>& value) {
  return value ? FormatDouble(*value) : "";
}

nlohmann::json ToJson(const PolicyConfig& config) {
  return {{"kind", std::string(PolicyName(config.kind))},
          {"theta", Threshold(config.theta)},
          {"theta_low", Threshold(config.theta_low)},
          {"theta_high", Threshold(config.theta_high)}};
}

PolicyConfig PolicyConfigFromJson(const nlohmann::json& j) {
  PolicyConfig c;
  c.kind = ParsePolicyKind(j.at("kind").get<std::string>());
  c.theta = ThresholdFrom(j.value("theta", nlohmann::json()));
  c.theta_low = ThresholdFrom(j.value("theta_low", nlohmann::json()));
  c.theta_high = ThresholdFrom(j.value("theta_high", nlohmann::json()));
  c.Validate();
  return c;
}

nlohmann::json ToJson(const Metrics& m) {
  return {{"tp", m.tp},
          {"fp", m.fp},
          {"fn", m.fn},
          {"tn", m.tn},
          {"accuracy", Nullable(m.accuracy)},
          {"precision", Nullable(m.precision)},
          {"recall", Nullable(m.recall)},
          {"f1", Nullable(m.f1)}};
}

nlohmann::json ToJson(const Averages& a) {
  return {{"accuracy", Nullable(a.accuracy)},
          {"precision", Nullable(a.precision)},
          {"recall", Nullable(a.recall)},
          {"f1", Nullable(a.f1)}};
}

nlohmann::json ToJson(const Fold& fold) {
  return {{"index", fold.index},
          {"test_topics", fold.test_topics},
          {"train_topics", fold.train_topics},
          {"dev_topics", fold.dev_topics}};
}

nlohmann::json ToJson(const EvalReport& report) {
  nlohmann::json folds = nlohmann::json::array();
  for (const FoldResult& r : report.folds) {
    nlohmann::json f = {
        {"fold", ToJson(r.fold)},
        {"metrics", ToJson(r.metrics)},
        {"categories",
         {{"single", ToJson(r.categories.single)},
          {"multiple", ToJson(r.categories.multiple)},
          {"no_key_point", ToJson(r.categories.no_key_point)}}}};
    f["policy_config"] = r.config ? ToJson(*r.config) : nlohmann::json();
    f["random_rate"] = Nullable(r.random_rate);
    if (r.expected) f["expected"] = ToJson(*r.expected);
    folds.push_back(std::move(f));
  }
  nlohmann::json j = {
      {"scorer", report.scorer},
      {"policy", std::string(PolicyName(report.policy))},
      {"seed", report.seed},
      {"folds", std::move(folds)},
      {"averaged", ToJson(report.averaged)},
      {"single", ToJson(report.single)},
      {"multiple", ToJson(report.multiple)},
      {"no_key_point_accuracy", Nullable(report.no_key_point_accuracy)}};
  if (report.expected) j["expected"] = ToJson(*report.expected);
  return j;
}

nlohmann::json ToJson(const DatasetStats& s) {
  return {{"pairs", s.pair_count},
          {"positives", s.positive_count},
          {"positive_rate", Nullable(s.positive_rate)},
          {"arguments", s.argument_count},
          {"key_points", s.key_point_count},
          {"topics", s.topic_count},
          {"key_points_per_topic", Nullable(s.key_points_per_topic)},
          {"arguments_per_topic", Nullable(s.arguments_per_topic)}};
}

nlohmann::json ToJson(const std::vector<CategoryTextStats>& stats) {
  nlohmann::json out = nlohmann::json::array();
  for (const CategoryTextStats& s : stats) {
    out.push_back({{"category", std::string(CategoryName(s.category))},
                   {"arguments", s.argument_count},
                   {"fraction", s.fraction},
                   {"mean_quality", Nullable(s.mean_quality)},
                   {"mean_tokens", s.mean_tokens},
                   {"mean_sentences", s.mean_sentences}});
  }
  return out;
}

std::string FormatReportTable(const EvalReport& report) {
  std::ostringstream out;
  out << "scorer: " << report.scorer
      << "  policy: " << PolicyName(report.policy)
      << "  seed: " << report.seed << "\n\n";
  out << std::left << std::setw(9) << "" << "| " << std::setw(27)
      << "All arguments" << "| " << std::setw(20) << "Single key point"
      << "| " << std::setw(20) << "Multiple key points" << "| No KP\n";
  out << std::setw(9) << "";
  for (const char* h : {"Acc", "P", "R", "F1"}) {
    out << (std::string(h) == "Acc" ? "| " : "") << std::setw(7) << h;
  }
  out << "| " << std::setw(7) << "P" << std::setw(7) << "R" << std::setw(6)
      << "F1";
  out << "| " << std::setw(7) << "P" << std::setw(7) << "R" << std::setw(6)
      << "F1";
  out << "| Acc\n";
  auto row = [&](const std::string& name, const Averages& all,
                 const Averages& single, const Averages& multiple,
                 const std::optional<double>& none_acc) {
    out << std::setw(9) << name << "| " << std::setw(7) << Cell(all.accuracy)
        << std::setw(7) << Cell(all.precision) << std::setw(7)
        << Cell(all.recall) << std::setw(6) << Cell(all.f1) << "| "
        << std::setw(7) << Cell(single.precision) << std::setw(7)
        << Cell(single.recall) << std::setw(6) << Cell(single.f1) << "| "
        << std::setw(7) << Cell(multiple.precision) << std::setw(7)
        << Cell(multiple.recall) << std::setw(6) << Cell(multiple.f1) << "| "
        << Cell(none_acc) << "\n";
  };
  auto as_avg = [](const Metrics& m) {
    return Averages{m.accuracy, m.precision, m.recall, m.f1};
  };
  for (const FoldResult& r : report.folds) {
    row("fold " + std::to_string(r.fold.index), as_avg(r.metrics),
        as_avg(r.categories.single), as_avg(r.categories.multiple),
        r.categories.no_key_point.accuracy);
  }
  row("mean", report.averaged, report.single, report.multiple,
      report.no_key_point_accuracy);
  if (report.expected) {
    out << "\nexpected (analytic) random baseline: acc "
        << Cell(report.expected->accuracy) << "  P "
        << Cell(report.expected->precision) << "  R "
        << Cell(report.expected->recall) << "  F1 "
        << Cell(report.expected->f1) << "\n";
  }
  for (const FoldResult& r : report.folds) {
    if (!r.config) continue;
    out << "fold " << r.fold.index << " thresholds: " << ToJson(*r.config).dump()
        << "\n";
  }
  return out.str();
}

std::string FormatCurve(const Curve& curve) {
  std::ostringstream out;
  WriteCsvRow(out, {"threshold", "precision", "recall", "f1"});
  for (const CurvePoint& p : curve.points) {
    WriteCsvRow(out, {FormatDouble(p.threshold),
                      FormatOptional(p.metrics.precision),
                      FormatOptional(p.metrics.recall),
                      FormatOptional(p.metrics.f1)});
  }
  return out.str();
}

nlohmann::json CurveSummary(const Curve& curve) {
  const CurvePoint& best = curve.points.at(curve.best_index);
  return {{"policy", std::string(PolicyName(curve.kind))},
          {"chosen_config", ToJson(curve.chosen_config)},
          {"chosen", {{"threshold", FormatDouble(curve.chosen.threshold)},
                      {"metrics", ToJson(curve.chosen.metrics)}}},
          {"best", {{"threshold", FormatDouble(best.threshold)},
                    {"metrics", ToJson(best.metrics)}}},
          {"points", curve.points.size()}};
}

std::string FormatCoverage(const std::vector<double>& coverage) {
  std::ostringstream out;
  WriteCsvRow(out, {"k", "mean_coverage"});
  for (size_t k = 0; k < coverage.size(); ++k) {
    WriteCsvRow(out, {std::to_string(k + 1), FormatDouble(coverage[k])});
  }
  return out.str();
}

std::string FormatDatasetStats(
    const DatasetStats& s, const std::vector<CategoryTextStats>& categories) {
  std::ostringstream out;
  out << "pairs:                " << s.pair_count << "\n"
      << "positive pairs:       " << s.positive_count << "\n"
      << "positive rate:        "
      << (s.positive_rate ? FormatDouble(*s.positive_rate) : "undefined") << "\n"
      << "arguments:            " << s.argument_count << "\n"
      << "key points:           " << s.key_point_count << "\n"
      << "topics:               " << s.topic_count << "\n"
      << "key points per topic: " << Cell(s.key_points_per_topic) << "\n"
      << "arguments per topic:  " << Cell(s.arguments_per_topic) << "\n\n";
  out << std::left << std::setw(14) << "category" << std::setw(12)
      << "% arguments" << std::setw(9) << "quality" << std::setw(10)
      << "# tokens" << "# sentences\n";
  for (const CategoryTextStats& c : categories) {
    std::ostringstream pct;
    pct << std::fixed << std::setprecision(1) << 100.0 * c.fraction << "%";
    out << std::setw(14) << CategoryName(c.category) << std::setw(12)
        << pct.str() << std::setw(9) << Cell(c.mean_quality) << std::setw(10)
        << Cell(c.mean_tokens) << Cell(c.mean_sentences) << "\n";
  }
  return out.str();
}

nlohmann::json AnnotationSummary(const AnnotationRun& run) {
  std::map<std::string, size_t> counts;
  for (const ConsolidatedArgument& c : run.consolidated) {
    ++counts[std::string(AnnotationCategoryName(c.category))];
  }
  nlohmann::json categories = nlohmann::json::object();
  for (const char* name : {"no_key_point", "ambiguous", "single", "multiple"}) {
    const size_t n = counts[name];
    categories[name] = {
        {"arguments", n},
        {"fraction", run.consolidated.empty()
                         ? nlohmann::json()
                         : nlohmann::json(static_cast<double>(n) /
                                          static_cast<double>(run.consolidated.size()))}};
  }
  nlohmann::json annotators = nlohmann::json::array();
  for (const AnnotatorReport& r : run.filter.annotators) {
    annotators.push_back({{"annotator_id", r.annotator_id},
                          {"judgments", r.judgments},
                          {"stance_errors", r.stance_errors},
                          {"stance_error_rate", r.stance_error_rate},
                          {"annotator_kappa", Nullable(r.kappa)},
                          {"removed_for_stance", r.removed_for_stance},
                          {"removed_for_kappa", r.removed_for_kappa}});
  }
  return {{"raw_judgments", run.raw_judgments},
          {"valid_judgments", run.valid.size()},
          {"stance_accuracy", run.stance_accuracy},
          {"fleiss_kappa", Nullable(run.fleiss_kappa)},
          {"mean_annotator_kappa", Nullable(run.mean_annotator_kappa)},
          {"consolidated_arguments", run.consolidated.size()},
          {"categories", std::move(categories)},
          {"dataset", ToJson(ComputeDatasetStats(run.dataset))},
          {"annotators", std::move(annotators)}};
}

}  // namespace kpm
