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

#ifndef KPM_EVAL_H_
#define KPM_EVAL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "kpm/annotation.h"
#include "kpm/corpus.h"
#include "kpm/fold.h"
#include "kpm/policies.h"
#include "kpm/scoring.h"

namespace kpm {

// Seeded shuffle of `topics`, consecutive blocks of n/4 as test sets; of the
// remaining topics (shuffled order) the first ones form dev (4 of 21 for the
// standard 28-topic split), the rest train. Strict mode requires exactly 28
// topics; otherwise any multiple of 4 works. Throws ValidationError.
std::vector<Fold> MakeFolds(std::span<const std::string> topics, uint64_t seed,
                            bool strict = true);

// Positive-class metrics from pooled pair counts.
struct Metrics {
  int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::optional<double> accuracy;   // undefined for zero pairs
  std::optional<double> precision;  // undefined when nothing is predicted
  std::optional<double> recall;     // undefined when nothing is positive
  std::optional<double> f1;         // undefined if P or R is; 0 if P = R = 0

  static Metrics FromCounts(int64_t tp, int64_t fp, int64_t fn, int64_t tn);
  int64_t total() const { return tp + fp + fn + tn; }
  bool operator==(const Metrics&) const = default;
};

using PredictionMap = std::map<std::string, Prediction>;

// Counts over the gold pairs whose topic is in `scope` (all when empty).
// Throws ValidationError when such a pair's argument has no prediction.
Metrics PairMetrics(const PredictionMap& predictions, const Dataset& gold,
                    std::span<const std::string> scope = {});

// Pairs split by the gold category of their argument. Report P/R/F1 for
// single and multiple, accuracy for no_key_point.
struct CategoryMetrics {
  Metrics no_key_point;
  Metrics single;
  Metrics multiple;

  bool operator==(const CategoryMetrics&) const = default;
};

CategoryMetrics ComputeCategoryMetrics(const PredictionMap& predictions,
                                       const Dataset& gold,
                                       std::span<const std::string> scope = {});

struct CurvePoint {
  double threshold = 0.0;  // theta, or theta_low for DualThreshold
  Metrics metrics;
};

struct Curve {
  PolicyKind kind = PolicyKind::kThreshold;
  PolicyConfig chosen_config;
  std::vector<CurvePoint> points;  // ascending threshold
  size_t best_index = 0;           // highest F1, ties to the larger threshold
  CurvePoint chosen;               // metrics at the learned thresholds
};

// Distinct scores of the in-scope pairs plus -inf and +inf, ascending.
std::vector<double> DefaultGrid(const ScoreTable& scores, const Dataset& dataset,
                                std::span<const std::string> scope);

// One point per grid value: Threshold and BMThreshold sweep theta;
// DualThreshold sweeps theta_low with theta_high fixed at the chosen value
// (raised to theta_low where the sweep passes it); BestMatch has a single
// point at -inf. Metrics are computed over `scope`.
Curve PrCurve(PolicyKind kind, const PolicyConfig& chosen,
              const ScoreTable& scores, const Dataset& dataset,
              std::span<const std::string> scope,
              std::span<const double> grid);

// Key point -> matched argument ids, for one (topic, stance).
struct CoverageGroup {
  std::string topic;
  Stance stance = Stance::kPro;
  size_t argument_count = 0;
  std::map<std::string, std::set<std::string>> matches;
};

std::vector<CoverageGroup> CoverageGroupsOf(const Dataset& dataset);
std::vector<CoverageGroup> CoverageGroupsOf(
    std::span<const ConsolidatedArgument> consolidated,
    const std::vector<Argument>& arguments,
    const std::vector<KeyPoint>& key_points);

// Entry k-1 is the mean, over groups with arguments, of the fraction of
// arguments matched by the k key points with most matches (ties by id).
// Groups with fewer key points carry their last value.
std::vector<double> CoverageCurve(std::span<const CoverageGroup> groups);

enum class ScorerKind { kTfIdf, kExternal, kMajority, kRandom };

struct ScorerSpec {
  ScorerKind kind = ScorerKind::kTfIdf;
  std::optional<ScoreTable> external;  // required for kExternal
  MethodKind method = MethodKind::kUnsupervised;
  std::string label;                   // for reports

  static ScorerSpec TfIdf();
  static ScorerSpec External(ScoreTable table, MethodKind method);
  static ScorerSpec Majority();
  static ScorerSpec Random();
};

struct Averages {
  std::optional<double> accuracy, precision, recall, f1;
  bool operator==(const Averages&) const = default;
};

// Mean over the folds where each field is defined.
Averages AverageMetrics(std::span<const Metrics> per_fold);

struct FoldResult {
  Fold fold;
  std::optional<PolicyConfig> config;   // absent for the baselines
  std::optional<double> random_rate;    // random baseline's match probability
  Metrics metrics;
  CategoryMetrics categories;
  std::optional<Metrics> expected;      // analytic random-baseline counts
};

struct EvalReport {
  std::string scorer;
  PolicyKind policy = PolicyKind::kThreshold;
  uint64_t seed = 0;
  std::vector<FoldResult> folds;
  Averages averaged;
  Averages single;
  Averages multiple;
  std::optional<double> no_key_point_accuracy;
  std::optional<Averages> expected;  // random baseline only
};

struct ExperimentOptions {
  bool strict_folds = true;
};

// Tf-idf is refit per fold on train + dev. Thresholds are learned on the
// tuning topics of the scorer's method kind and applied to the test topics.
// The random baseline matches each test pair independently with probability
// equal to the positive rate of the fold's train topics.
EvalReport RunExperiment(const Dataset& dataset, const ScorerSpec& scorer,
                         PolicyKind policy, uint64_t seed,
                         const ExperimentOptions& options = {});

// Scores and learned thresholds for one fold, shared by the experiment and
// curve commands. Baseline scorers are rejected.
struct FoldScoring {
  ScoreTable scores;
  std::vector<std::string> tuning_topics;
};
FoldScoring ScoreFold(const Dataset& dataset, const ScorerSpec& scorer,
                      const Fold& fold);

}  // namespace kpm

#endif  // KPM_EVAL_H_
