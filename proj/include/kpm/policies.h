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

#ifndef KPM_POLICIES_H_
#define KPM_POLICIES_H_

#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kpm/corpus.h"
#include "kpm/fold.h"
#include "kpm/scoring.h"

namespace kpm {

inline constexpr double kMatchNothing = std::numeric_limits<double>::infinity();
inline constexpr double kNoGate = -std::numeric_limits<double>::infinity();

enum class PolicyKind { kThreshold, kBestMatch, kBMThreshold, kDualThreshold };

// "threshold", "best-match", "bm-threshold", "dual-threshold".
std::string_view PolicyName(PolicyKind kind);
PolicyKind ParsePolicyKind(std::string_view name);  // throws ValidationError
inline constexpr PolicyKind kAllPolicies[] = {
    PolicyKind::kThreshold, PolicyKind::kBestMatch, PolicyKind::kBMThreshold,
    PolicyKind::kDualThreshold};

struct PolicyConfig {
  PolicyKind kind = PolicyKind::kThreshold;
  std::optional<double> theta;
  std::optional<double> theta_low;
  std::optional<double> theta_high;

  static PolicyConfig Threshold(double theta) {
    return {PolicyKind::kThreshold, theta, std::nullopt, std::nullopt};
  }
  static PolicyConfig BestMatch() {
    return {PolicyKind::kBestMatch, std::nullopt, std::nullopt, std::nullopt};
  }
  static PolicyConfig BMThreshold(double theta) {
    return {PolicyKind::kBMThreshold, theta, std::nullopt, std::nullopt};
  }
  static PolicyConfig DualThreshold(double low, double high) {
    return {PolicyKind::kDualThreshold, std::nullopt, low, high};
  }

  // Threshold kinds need theta, DualThreshold needs theta_low <= theta_high.
  // Throws ValidationError.
  void Validate() const;
  bool operator==(const PolicyConfig&) const = default;
};

struct Candidate {
  std::string key_point_id;
  double score = 0.0;
};

struct Prediction {
  std::string argument_id;
  std::set<std::string> matched_key_point_ids;

  bool operator==(const Prediction&) const = default;
};

// Candidates ordered by descending score, ties by ascending key point id.
void RankCandidates(std::vector<Candidate>& candidates);

// Every policy selects a prefix of the ranked candidates; this is its length
// given the scores in ranked (descending) order. Config must be valid.
size_t SelectionSize(const PolicyConfig& config,
                     std::span<const double> ranked_scores);

// Selection over one argument's candidates (score >= threshold matches).
//   Threshold:     every candidate at or above theta.
//   BestMatch:     the top candidate.
//   BMThreshold:   the top candidate if it reaches theta.
//   DualThreshold: the top two if the second reaches theta_low and the first
//                  reaches theta_high, else the top one if it reaches
//                  theta_low.
// Throws ValidationError for an empty candidate list.
std::set<std::string> SelectMatches(const PolicyConfig& config,
                                    std::vector<Candidate> candidates);

// Scored candidates of one argument of `dataset`. Throws ValidationError if a
// candidate has no score or the argument has no candidates.
std::vector<Candidate> CandidatesOf(const ScoreTable& scores,
                                    const Dataset& dataset,
                                    size_t argument_index);

Prediction ApplyPolicy(const PolicyConfig& config, const ScoreTable& scores,
                       const Dataset& dataset, std::string_view argument_id);

// Predictions for every argument whose topic is in `topics` (all when empty),
// keyed by argument id.
std::map<std::string, Prediction> PredictAll(
    const PolicyConfig& config, const ScoreTable& scores,
    const Dataset& dataset, std::span<const std::string> topics = {});

struct ScoredLabel {
  double score = 0.0;
  bool positive = false;
};

struct ThresholdFit {
  double theta = kMatchNothing;
  double f1 = 0.0;
};

// Threshold over {observed scores} u {+inf} maximizing positive-class F1 of
// "score >= theta"; ties go to the larger theta. `unreachable_positives`
// adds positives no threshold can recover (they only count as misses).
// Throws ValidationError when there is no positive at all.
ThresholdFit LearnThreshold(std::span<const ScoredLabel> pairs,
                            size_t unreachable_positives = 0);

struct ScoredCandidate {
  std::string key_point_id;
  double score = 0.0;
  bool positive = false;
};

// One argument's candidates with gold labels.
using ArgumentCandidates = std::vector<ScoredCandidate>;

struct DualThresholdFit {
  double theta_low = kMatchNothing;
  double theta_high = kMatchNothing;
  double f1 = 0.0;
};

// Exact optimum over every pair theta_low <= theta_high drawn from
// {observed scores} u {+inf}, maximizing pair-level F1 of the DualThreshold
// policy; ties go to the larger theta_high, then the larger theta_low.
// O(m^2) in the number m of distinct scores. Throws ValidationError without
// positives.
DualThresholdFit LearnDualThresholds(std::span<const ArgumentCandidates> data);

// BMThreshold theta maximizing pair-level F1 of BMThreshold predictions.
ThresholdFit LearnBestMatchThreshold(std::span<const ArgumentCandidates> data);

enum class MethodKind { kSupervised, kUnsupervised };

// Supervised scorers tune on dev topics, unsupervised ones on train + dev.
std::vector<std::string> TuningTopics(const Fold& fold, MethodKind method);

// Labeled candidates of every argument in `topics`.
std::vector<ArgumentCandidates> CollectTuningData(
    const ScoreTable& scores, const Dataset& dataset,
    std::span<const std::string> topics);

// Learns the thresholds `kind` needs from `tuning`.
PolicyConfig LearnPolicy(PolicyKind kind,
                         std::span<const ArgumentCandidates> tuning);

}  // namespace kpm

#endif  // KPM_POLICIES_H_
