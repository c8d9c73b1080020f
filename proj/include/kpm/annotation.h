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

#ifndef KPM_ANNOTATION_H_
#define KPM_ANNOTATION_H_

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kpm/corpus.h"

namespace kpm {

// One annotator's answer for one argument. Before cleansing, selected_none may
// coexist with selected key points; such a judgment is illegal.
struct RawJudgment {
  std::string annotator_id;
  std::string argument_id;
  std::set<std::string> selected_key_point_ids;
  bool selected_none = false;
  Stance stance_answer = Stance::kPro;

  bool IsIllegal() const {
    return selected_none && !selected_key_point_ids.empty();
  }
  bool operator==(const RawJudgment&) const = default;
};

// Candidate key points per argument: every key point sharing the argument's
// topic and stance.
class CandidateIndex {
 public:
  CandidateIndex() = default;
  CandidateIndex(const std::vector<Argument>& arguments,
                 const std::vector<KeyPoint>& key_points);

  // Sorted key point ids; empty for an unknown argument.
  const std::vector<std::string>& Of(const std::string& argument_id) const;
  bool Contains(const std::string& argument_id) const {
    return candidates_.count(argument_id) > 0;
  }

 private:
  std::map<std::string, std::vector<std::string>> candidates_;
};

using GoldStances = std::map<std::string, Stance>;

// --- Agreement ----------------------------------------------------------------

// Cohen's kappa for two binary label sequences (values 0/1). Undefined when
// the chance agreement is 1. Throws ValidationError on length mismatch, empty
// input or a non-binary value.
std::optional<double> CohenKappa(std::span<const int> labels_a,
                                 std::span<const int> labels_b);

// Fleiss' kappa over an item x category count matrix. Items may have
// different numbers of raters; each needs at least two. Undefined when the
// expected agreement is 1 (a single category ever used).
std::optional<double> FleissKappa(std::span<const std::vector<int>> counts);

// (argument id, key point id) -> 0/1, per annotator.
using BinaryDecisions =
    std::map<std::string, std::map<std::pair<std::string, std::string>, int>>;

// Every judgment becomes one decision per candidate key point of its
// argument: 1 if selected, else 0. A None answer yields all zeros.
BinaryDecisions ExpandBinary(std::span<const RawJudgment> judgments,
                             const CandidateIndex& candidates);

// Mean pairwise Cohen's kappa per annotator. A partner qualifies when it
// shares at least `min_shared` decisions with the annotator and their kappa
// is defined; fewer than `min_partners` qualifying partners leaves the score
// undefined.
std::map<std::string, std::optional<double>> AnnotatorKappa(
    const BinaryDecisions& decisions, int min_shared, int min_partners);

// --- Filtering and consolidation ------------------------------------------------

struct FilterOptions {
  double max_stance_error = 0.10;
  double min_kappa = 0.3;
  int min_shared = 50;
  int min_partners = 5;
};

struct AnnotatorReport {
  std::string annotator_id;
  size_t judgments = 0;
  size_t stance_errors = 0;
  double stance_error_rate = 0.0;
  std::optional<double> kappa;  // computed only for stance-filter survivors
  bool removed_for_stance = false;
  bool removed_for_kappa = false;
};

struct FilterResult {
  std::vector<RawJudgment> retained;
  std::vector<AnnotatorReport> annotators;  // sorted by id
};

// Drops every judgment of annotators whose stance error rate exceeds
// max_stance_error, then of annotators whose annotator-kappa (computed over
// the stance survivors) is below min_kappa. Undefined kappa keeps the
// annotator. Throws ValidationError for an argument without gold stance.
FilterResult FilterAnnotators(std::span<const RawJudgment> judgments,
                              const GoldStances& gold_stance,
                              const CandidateIndex& candidates,
                              const FilterOptions& options = {});

// Drops single judgments with a wrong stance answer or an illegal selection.
std::vector<RawJudgment> Cleanse(std::span<const RawJudgment> judgments,
                                 const GoldStances& gold_stance);

enum class AnnotationCategory { kNoKeyPoint, kAmbiguous, kSingle, kMultiple };
std::string_view AnnotationCategoryName(AnnotationCategory category);

struct ConsolidatedArgument {
  std::string argument_id;
  std::set<std::string> matched_key_point_ids;
  AnnotationCategory category = AnnotationCategory::kAmbiguous;
  size_t valid_judgments = 0;

  bool operator==(const ConsolidatedArgument&) const = default;
};

// Arguments with fewer than min_judgments judgments are left out. A key point
// is matched when its selection fraction is >= majority; the argument has no
// key point when the fraction of empty selections is >= majority; otherwise,
// with nothing matched, it is ambiguous. Sorted by argument id.
std::vector<ConsolidatedArgument> Consolidate(
    std::span<const RawJudgment> judgments, double majority = 0.6,
    int min_judgments = 7);

struct LabelScore {
  std::string argument_id;
  std::string key_point_id;
  double score = 0.0;

  bool operator==(const LabelScore&) const = default;
};

// Fraction of an argument's judgments selecting each candidate key point, for
// arguments with at least min_judgments judgments. Throws ValidationError
// when a judgment selects a key point outside the argument's candidates.
std::vector<LabelScore> ComputeLabelScores(
    std::span<const RawJudgment> judgments, const CandidateIndex& candidates,
    int min_judgments = 7);

// score >= positive_min is a match, score <= negative_max a non-match, the
// rest is dropped; then key points with fewer than min_matches_per_kp
// matches lose all their pairs (single pass).
std::vector<LabeledPair> GeneratePairs(std::span<const LabelScore> scores,
                                       double positive_min = 0.6,
                                       double negative_max = 0.15,
                                       int min_matches_per_kp = 3);

// --- End-to-end ---------------------------------------------------------------

struct AnnotationOptions {
  FilterOptions filter;
  double majority = 0.6;
  int min_judgments = 7;
  double positive_min = 0.6;
  double negative_max = 0.15;
  int min_matches_per_kp = 3;
};

struct AnnotationRun {
  FilterResult filter;
  std::vector<RawJudgment> valid;  // after filtering and cleansing
  std::vector<ConsolidatedArgument> consolidated;
  std::vector<LabelScore> label_scores;
  Dataset dataset;
  size_t raw_judgments = 0;
  double stance_accuracy = 0.0;            // over raw judgments
  std::optional<double> fleiss_kappa;      // over valid binary decisions
  std::optional<double> mean_annotator_kappa;  // over retained annotators
};

// filter -> cleanse -> consolidate / label scores -> generate pairs.
AnnotationRun RunAnnotationPipeline(std::span<const RawJudgment> judgments,
                                    const std::vector<Argument>& arguments,
                                    const std::vector<KeyPoint>& key_points,
                                    const AnnotationOptions& options = {});

// Columns: annotator_id, argument_id, selected (pipe-separated key point ids
// or NONE), stance_answer. Duplicate (annotator, argument) rows are rejected.
std::vector<RawJudgment> ParseJudgments(const CsvTable& table);
std::vector<RawJudgment> LoadJudgments(const std::string& path);

// Columns: argument_id, argument, topic, stance and optionally quality.
std::vector<Argument> ParseArguments(const CsvTable& table);
std::vector<Argument> LoadArguments(const std::string& path);

// Columns: key_point_id, key_point, topic, stance.
std::vector<KeyPoint> ParseKeyPoints(const CsvTable& table);
std::vector<KeyPoint> LoadKeyPoints(const std::string& path);

}  // namespace kpm

#endif  // KPM_ANNOTATION_H_
