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

#include "kpm/scoring.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "kpm/errors.h"
#include "kpm/text.h"

namespace kpm {
namespace {

std::string PairName(const std::string& a, const std::string& k) {
  return "(" + a + ", " + k + ")";
}

bool InScope(std::span<const std::string> topics, const std::string& topic) {
  return topics.empty() ||
         std::find(topics.begin(), topics.end(), topic) != topics.end();
}

}  // namespace

void ScoreTable::Set(const std::string& argument_id,
                     const std::string& key_point_id, double score) {
  if (!std::isfinite(score)) {
    throw ValidationError("non-finite score for pair " +
                          PairName(argument_id, key_point_id));
  }
  if (provenance_ == ScoreProvenance::kTfIdf && (score < 0.0 || score > 1.0)) {
    throw ValidationError("tf-idf score outside [0,1] for pair " +
                          PairName(argument_id, key_point_id));
  }
  entries_[{argument_id, key_point_id}] = score;
}

std::optional<double> ScoreTable::Get(const std::string& argument_id,
                                      const std::string& key_point_id) const {
  auto it = entries_.find({argument_id, key_point_id});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ValidateCoverage(const ScoreTable& table, const Dataset& dataset,
                      std::span<const std::string> topics) {
  size_t expected = 0;
  for (const LabeledPair& p : dataset.pairs()) {
    if (!InScope(topics, dataset.FindArgument(p.argument_id)->topic)) continue;
    ++expected;
    if (!table.Get(p.argument_id, p.key_point_id)) {
      throw ValidationError("missing score for pair " +
                            PairName(p.argument_id, p.key_point_id));
    }
  }
  if (expected == table.size()) return;
  for (const auto& [key, score] : table.entries()) {
    const Argument* a = dataset.FindArgument(key.first);
    bool known = false;
    if (a && InScope(topics, a->topic)) {
      auto idx = *dataset.ArgumentIndex(key.first);
      for (const LabeledPair& p : dataset.PairsOf(idx)) {
        if (p.key_point_id == key.second) known = true;
      }
    }
    if (!known) {
      throw ValidationError("score for pair " +
                            PairName(key.first, key.second) +
                            " outside the dataset");
    }
  }
}

TfIdfModel TfIdfModel::Fit(std::span<const std::string> documents) {
  std::map<std::string, size_t, std::less<>> df;
  for (const std::string& doc : documents) {
    auto tokens = Tokenize(doc);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (std::string& t : tokens) ++df[std::move(t)];
  }
  if (df.empty()) {
    throw ValidationError("tf-idf: no tokens in the fitting documents");
  }
  TfIdfModel model;
  model.document_count_ = documents.size();
  const auto n = static_cast<double>(documents.size());
  for (const auto& [term, count] : df) {
    model.vocabulary_.emplace(term, model.idf_.size());
    model.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) +
                         1.0);
  }
  return model;
}

std::optional<size_t> TfIdfModel::TermId(std::string_view term) const {
  auto it = vocabulary_.find(term);
  if (it == vocabulary_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> TfIdfModel::Idf(std::string_view term) const {
  auto id = TermId(term);
  if (!id) return std::nullopt;
  return idf_[*id];
}

std::vector<std::pair<size_t, double>> TfIdfModel::Vectorize(
    std::string_view text) const {
  std::map<size_t, int> counts;
  for (const std::string& token : Tokenize(text)) {
    if (auto id = TermId(token)) ++counts[*id];
  }
  std::vector<std::pair<size_t, double>> out;
  out.reserve(counts.size());
  for (const auto& [id, tf] : counts) {
    out.emplace_back(id, static_cast<double>(tf) * idf_[id]);
  }
  return out;
}

double SparseCosine(std::span<const std::pair<size_t, double>> a,
                    std::span<const std::pair<size_t, double>> b) {
  double dot = 0.0;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) {
      ++i;
    } else if (b[j].first < a[i].first) {
      ++j;
    } else {
      dot += a[i].second * b[j].second;
      ++i;
      ++j;
    }
  }
  double norm_a = 0.0, norm_b = 0.0;
  for (const auto& [id, w] : a) norm_a += w * w;
  for (const auto& [id, w] : b) norm_b += w * w;
  if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(norm_a * norm_b), 0.0, 1.0);
}

double TfIdfModel::Score(std::string_view text_a,
                         std::string_view text_b) const {
  return SparseCosine(Vectorize(text_a), Vectorize(text_b));
}

ScoreTable ScoreDatasetTfIdf(const Dataset& dataset,
                             std::span<const std::string> fit_topics,
                             std::span<const std::string> score_topics) {
  if (fit_topics.empty()) throw ValidationError("tf-idf: empty fit scope");
  for (const std::string& t : fit_topics) {
    if (!std::binary_search(dataset.topics().begin(), dataset.topics().end(),
                            t)) {
      throw ValidationError("tf-idf: unknown fit topic '" + t + "'");
    }
  }
  std::vector<std::string> documents;
  for (const Argument& a : dataset.arguments()) {
    if (InScope(fit_topics, a.topic)) documents.push_back(a.text);
  }
  for (const KeyPoint& k : dataset.key_points()) {
    if (InScope(fit_topics, k.topic)) documents.push_back(k.text);
  }
  const TfIdfModel model = TfIdfModel::Fit(documents);

  std::map<std::string, std::vector<std::pair<size_t, double>>> kp_vectors;
  for (const KeyPoint& k : dataset.key_points()) {
    if (InScope(score_topics, k.topic)) kp_vectors[k.id] = model.Vectorize(k.text);
  }
  ScoreTable table(ScoreProvenance::kTfIdf, "tfidf");
  for (size_t i = 0; i < dataset.arguments().size(); ++i) {
    const Argument& a = dataset.arguments()[i];
    if (!InScope(score_topics, a.topic)) continue;
    const auto arg_vector = model.Vectorize(a.text);
    for (const LabeledPair& p : dataset.PairsOf(i)) {
      table.Set(p.argument_id, p.key_point_id,
                SparseCosine(arg_vector, kp_vectors.at(p.key_point_id)));
    }
  }
  return table;
}

ScoreTable ParseScores(const CsvTable& table, const Dataset& dataset,
                       std::string name) {
  auto column = [&](const char* col) {
    auto idx = table.Column(col);
    if (!idx) {
      throw ValidationError(std::string("missing column '") + col + "'");
    }
    return *idx;
  };
  const size_t c_arg = column("arg_id");
  const size_t c_kp = column("key_point_id");
  const size_t c_score = column("score");

  std::set<ScoreTable::Key> known;
  for (const LabeledPair& p : dataset.pairs()) {
    known.emplace(p.argument_id, p.key_point_id);
  }
  ScoreTable scores(ScoreProvenance::kExternal, std::move(name));
  for (const CsvRecord& row : table.rows) {
    const std::string where = " at row " + std::to_string(row.line);
    if (row.fields.size() != table.header.size()) {
      throw ValidationError("wrong field count" + where);
    }
    const std::string& a = row.fields[c_arg];
    const std::string& k = row.fields[c_kp];
    auto value = ParseDouble(row.fields[c_score]);
    if (!value) {
      throw ValidationError("non-numeric score '" + row.fields[c_score] + "'" +
                            where);
    }
    if (!std::isfinite(*value)) {
      throw ValidationError("non-finite score '" + row.fields[c_score] + "'" +
                            where);
    }
    if (!known.count({a, k})) {
      throw ValidationError("pair " + PairName(a, k) +
                            " is not in the dataset" + where);
    }
    if (scores.Get(a, k)) {
      throw ValidationError("duplicate pair " + PairName(a, k) + where);
    }
    scores.Set(a, k, *value);
  }
  for (const auto& [a, k] : known) {
    if (!scores.Get(a, k)) {
      throw ValidationError("missing score for pair " + PairName(a, k));
    }
  }
  return scores;
}

ScoreTable LoadScores(const std::string& path, const Dataset& dataset) {
  const CsvTable table = ReadCsvFile(path);
  try {
    return ParseScores(table, dataset, path);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::string FormatScores(const ScoreTable& table) {
  std::ostringstream out;
  WriteCsvRow(out, {"arg_id", "key_point_id", "score"});
  for (const auto& [key, score] : table.entries()) {
    WriteCsvRow(out, {key.first, key.second, FormatDouble(score)});
  }
  return out.str();
}

void WriteScores(const ScoreTable& table, const std::string& path) {
  WriteFile(path, FormatScores(table));
}

}  // namespace kpm
