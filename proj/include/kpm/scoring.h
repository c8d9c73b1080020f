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

#ifndef KPM_SCORING_H_
#define KPM_SCORING_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kpm/corpus.h"

namespace kpm {

enum class ScoreProvenance { kTfIdf, kExternal };

// Match score per (argument id, key point id). Scores are finite; tf-idf
// scores additionally lie in [0, 1]. External scores may use any scale.
class ScoreTable {
 public:
  using Key = std::pair<std::string, std::string>;

  explicit ScoreTable(ScoreProvenance provenance = ScoreProvenance::kExternal,
                      std::string name = "")
      : provenance_(provenance), name_(std::move(name)) {}

  // Throws ValidationError for a non-finite score (or out of [0,1] for
  // tf-idf tables).
  void Set(const std::string& argument_id, const std::string& key_point_id,
           double score);
  std::optional<double> Get(const std::string& argument_id,
                            const std::string& key_point_id) const;

  const std::map<Key, double>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  ScoreProvenance provenance() const { return provenance_; }
  const std::string& name() const { return name_; }

  bool operator==(const ScoreTable&) const = default;

 private:
  ScoreProvenance provenance_;
  std::string name_;
  std::map<Key, double> entries_;
};

// Throws ValidationError naming the first pair of `dataset` (restricted to
// `topics` when non-empty) without a score, or the first scored pair outside
// that set.
void ValidateCoverage(const ScoreTable& table, const Dataset& dataset,
                      std::span<const std::string> topics = {});

class TfIdfModel {
 public:
  // Vocabulary is every token of every document; ids follow lexicographic
  // token order. idf(t) = ln((1 + N) / (1 + df(t))) + 1.
  // Throws ValidationError when no document has a token.
  static TfIdfModel Fit(std::span<const std::string> documents);

  // Sparse tf-idf vector sorted by term id; tf is the raw count and
  // out-of-vocabulary tokens are dropped.
  std::vector<std::pair<size_t, double>> Vectorize(std::string_view text) const;

  // Cosine similarity of the two tf-idf vectors, 0 if either is all-zero.
  double Score(std::string_view text_a, std::string_view text_b) const;

  std::optional<size_t> TermId(std::string_view term) const;
  std::optional<double> Idf(std::string_view term) const;
  size_t vocabulary_size() const { return idf_.size(); }
  size_t document_count() const { return document_count_; }

 private:
  std::map<std::string, size_t, std::less<>> vocabulary_;
  std::vector<double> idf_;
  size_t document_count_ = 0;
};

inline TfIdfModel FitTfIdf(std::span<const std::string> documents) {
  return TfIdfModel::Fit(documents);
}

inline double TfIdfScore(const TfIdfModel& model, std::string_view text_a,
                         std::string_view text_b) {
  return model.Score(text_a, text_b);
}

// Cosine of two sparse vectors sorted by index.
double SparseCosine(std::span<const std::pair<size_t, double>> a,
                    std::span<const std::pair<size_t, double>> b);

// Fits on every argument and key point text of `fit_topics` and scores the
// pairs whose topic is in `score_topics` (all pairs when empty).
ScoreTable ScoreDatasetTfIdf(const Dataset& dataset,
                             std::span<const std::string> fit_topics,
                             std::span<const std::string> score_topics = {});

// Score file: header "arg_id,key_point_id,score", one row per pair of
// `dataset`. Rejects missing, extra and duplicate pairs and non-finite or
// non-numeric scores, with row numbers.
ScoreTable ParseScores(const CsvTable& table, const Dataset& dataset,
                       std::string name = "external");
ScoreTable LoadScores(const std::string& path, const Dataset& dataset);

std::string FormatScores(const ScoreTable& table);
void WriteScores(const ScoreTable& table, const std::string& path);

}  // namespace kpm

#endif  // KPM_SCORING_H_
