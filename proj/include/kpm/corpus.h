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

#ifndef KPM_CORPUS_H_
#define KPM_CORPUS_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kpm/csv.h"

namespace kpm {

enum class Stance { kPro, kCon };

// Accepts "1", "pro", "Pro" and "-1", "con", "Con". Throws ValidationError.
Stance ParseStance(std::string_view token);
std::string_view StanceName(Stance stance);

struct Argument {
  std::string id;
  std::string text;
  std::string topic;
  Stance stance = Stance::kPro;
  std::optional<double> quality;

  bool operator==(const Argument&) const = default;
};

struct KeyPoint {
  std::string id;
  std::string text;
  std::string topic;
  Stance stance = Stance::kPro;

  bool operator==(const KeyPoint&) const = default;
};

enum class Label { kNoMatch, kMatch };

struct LabeledPair {
  std::string argument_id;
  std::string key_point_id;
  Label label = Label::kNoMatch;

  bool operator==(const LabeledPair&) const = default;
};

// Gold category of an argument by its number of matching key points.
enum class Category { kNoKeyPoint, kSingle, kMultiple };
std::string_view CategoryName(Category category);

// Immutable, validated pair dataset. Arguments and key points are sorted by
// id, pairs by (argument id, key point id), topics lexicographically, so the
// value does not depend on input order. The pairs of one argument form a
// contiguous run; those key points are the argument's candidates.
class Dataset {
 public:
  Dataset() = default;

  // Throws ValidationError on duplicate ids, duplicate pairs, empty texts,
  // dangling references, or topic/stance disagreement inside a pair.
  static Dataset Build(std::vector<Argument> arguments,
                       std::vector<KeyPoint> key_points,
                       std::vector<LabeledPair> pairs);

  const std::vector<Argument>& arguments() const { return arguments_; }
  const std::vector<KeyPoint>& key_points() const { return key_points_; }
  const std::vector<LabeledPair>& pairs() const { return pairs_; }
  const std::vector<std::string>& topics() const { return topics_; }

  const Argument* FindArgument(std::string_view id) const;
  const KeyPoint* FindKeyPoint(std::string_view id) const;
  std::optional<size_t> ArgumentIndex(std::string_view id) const;

  // Pairs of the argument at `argument_index` in arguments().
  std::span<const LabeledPair> PairsOf(size_t argument_index) const;
  size_t MatchCount(size_t argument_index) const;

  bool operator==(const Dataset& other) const {
    return arguments_ == other.arguments_ &&
           key_points_ == other.key_points_ && pairs_ == other.pairs_;
  }

 private:
  std::vector<Argument> arguments_;
  std::vector<KeyPoint> key_points_;
  std::vector<LabeledPair> pairs_;
  std::vector<std::string> topics_;
  std::vector<size_t> pair_offsets_;  // arguments_.size() + 1 entries
};

// Header names bound to each column role. An id role may name the same column
// as the matching text role for releases that carry no ids. The key point
// topic/stance roles are optional and default to the row's topic/stance.
struct ColumnMap {
  std::string argument_id = "arg_id";
  std::string key_point_id = "key_point_id";
  std::string argument_text = "argument";
  std::string key_point_text = "key_point";
  std::string topic = "topic";
  std::string stance = "stance";
  std::string label = "label";
  std::string quality;            // empty: no quality column
  std::string key_point_topic;    // empty: same as topic
  std::string key_point_stance;   // empty: same as stance
};

// Errors name the offending row (1-based line number, header is line 1).
Dataset ParseDataset(const CsvTable& table, const ColumnMap& columns);
Dataset LoadDataset(const std::string& path,
                    const ColumnMap& columns = ColumnMap{});

// Writes with the default ColumnMap header; a "quality" column is added when
// any argument carries a quality score.
std::string FormatDataset(const Dataset& dataset);
void WriteDataset(const Dataset& dataset, const std::string& path);

struct DatasetStats {
  size_t pair_count = 0;
  size_t positive_count = 0;
  std::optional<double> positive_rate;  // undefined for zero pairs
  size_t argument_count = 0;
  size_t key_point_count = 0;
  size_t topic_count = 0;
  std::optional<double> key_points_per_topic;
  std::optional<double> arguments_per_topic;
};

DatasetStats ComputeDatasetStats(const Dataset& dataset);

// Throws ValidationError for an unknown argument id.
Category CategoryOf(const Dataset& dataset, std::string_view argument_id);
Category CategoryForMatchCount(size_t match_count);

struct CategoryTextStats {
  Category category = Category::kNoKeyPoint;
  size_t argument_count = 0;
  double fraction = 0.0;
  std::optional<double> mean_quality;  // over arguments that carry quality
  double mean_tokens = 0.0;
  double mean_sentences = 0.0;
};

// One entry per category that has at least one argument, in enum order.
std::vector<CategoryTextStats> ComputeCategoryTextStats(const Dataset& dataset);

}  // namespace kpm

#endif  // KPM_CORPUS_H_
