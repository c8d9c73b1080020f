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

#include "kpm/corpus.h"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "kpm/errors.h"
#include "kpm/text.h"

namespace kpm {
namespace {

template <typename T>
const T* FindById(const std::vector<T>& items, std::string_view id) {
  auto it = std::lower_bound(
      items.begin(), items.end(), id,
      [](const T& item, std::string_view key) { return item.id < key; });
  if (it == items.end() || it->id != id) return nullptr;
  return &*it;
}

std::string RowTag(int line) { return " at row " + std::to_string(line); }

Label ParseLabel(std::string_view token, int line) {
  if (token == "1") return Label::kMatch;
  if (token == "0") return Label::kNoMatch;
  throw ValidationError("unparseable label '" + std::string(token) + "'" +
                        RowTag(line));
}

}  // namespace

Stance ParseStance(std::string_view token) {
  if (token == "1" || token == "pro" || token == "Pro") return Stance::kPro;
  if (token == "-1" || token == "con" || token == "Con") return Stance::kCon;
  throw ValidationError("unparseable stance '" + std::string(token) + "'");
}

std::string_view StanceName(Stance stance) {
  return stance == Stance::kPro ? "pro" : "con";
}

std::string_view CategoryName(Category category) {
  switch (category) {
    case Category::kNoKeyPoint: return "no_key_point";
    case Category::kSingle: return "single";
    case Category::kMultiple: return "multiple";
  }
  return "";
}

Dataset Dataset::Build(std::vector<Argument> arguments,
                       std::vector<KeyPoint> key_points,
                       std::vector<LabeledPair> pairs) {
  Dataset d;
  d.arguments_ = std::move(arguments);
  d.key_points_ = std::move(key_points);
  d.pairs_ = std::move(pairs);

  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(d.arguments_.begin(), d.arguments_.end(), by_id);
  std::sort(d.key_points_.begin(), d.key_points_.end(), by_id);
  std::sort(d.pairs_.begin(), d.pairs_.end(),
            [](const LabeledPair& a, const LabeledPair& b) {
              return std::tie(a.argument_id, a.key_point_id) <
                     std::tie(b.argument_id, b.key_point_id);
            });

  std::set<std::string> topics;
  for (size_t i = 0; i < d.arguments_.size(); ++i) {
    const Argument& a = d.arguments_[i];
    if (i > 0 && d.arguments_[i - 1].id == a.id) {
      throw ValidationError("duplicate argument id '" + a.id + "'");
    }
    if (Trim(a.text).empty()) {
      throw ValidationError("empty text for argument '" + a.id + "'");
    }
    if (a.quality && !(*a.quality >= 0.0 && *a.quality <= 1.0)) {
      throw ValidationError("quality outside [0,1] for argument '" + a.id +
                            "'");
    }
    topics.insert(a.topic);
  }
  for (size_t i = 0; i < d.key_points_.size(); ++i) {
    const KeyPoint& k = d.key_points_[i];
    if (i > 0 && d.key_points_[i - 1].id == k.id) {
      throw ValidationError("duplicate key point id '" + k.id + "'");
    }
    if (Trim(k.text).empty()) {
      throw ValidationError("empty text for key point '" + k.id + "'");
    }
    topics.insert(k.topic);
  }
  d.topics_.assign(topics.begin(), topics.end());

  d.pair_offsets_.assign(d.arguments_.size() + 1, 0);
  for (size_t i = 0; i < d.pairs_.size(); ++i) {
    const LabeledPair& p = d.pairs_[i];
    if (i > 0 && d.pairs_[i - 1].argument_id == p.argument_id &&
        d.pairs_[i - 1].key_point_id == p.key_point_id) {
      throw ValidationError("duplicate pair (" + p.argument_id + ", " +
                            p.key_point_id + ")");
    }
    const Argument* a = FindById(d.arguments_, p.argument_id);
    const KeyPoint* k = FindById(d.key_points_, p.key_point_id);
    if (!a) throw ValidationError("dangling argument id '" + p.argument_id + "'");
    if (!k) {
      throw ValidationError("dangling key point id '" + p.key_point_id + "'");
    }
    if (a->topic != k->topic) {
      throw ValidationError("topic mismatch in pair (" + p.argument_id + ", " +
                            p.key_point_id + ")");
    }
    if (a->stance != k->stance) {
      throw ValidationError("stance mismatch in pair (" + p.argument_id +
                            ", " + p.key_point_id + ")");
    }
    ++d.pair_offsets_[static_cast<size_t>(a - d.arguments_.data()) + 1];
  }
  for (size_t i = 1; i < d.pair_offsets_.size(); ++i) {
    d.pair_offsets_[i] += d.pair_offsets_[i - 1];
  }
  return d;
}

const Argument* Dataset::FindArgument(std::string_view id) const {
  return FindById(arguments_, id);
}

const KeyPoint* Dataset::FindKeyPoint(std::string_view id) const {
  return FindById(key_points_, id);
}

std::optional<size_t> Dataset::ArgumentIndex(std::string_view id) const {
  const Argument* a = FindArgument(id);
  if (!a) return std::nullopt;
  return static_cast<size_t>(a - arguments_.data());
}

std::span<const LabeledPair> Dataset::PairsOf(size_t argument_index) const {
  return std::span<const LabeledPair>(pairs_).subspan(
      pair_offsets_[argument_index],
      pair_offsets_[argument_index + 1] - pair_offsets_[argument_index]);
}

size_t Dataset::MatchCount(size_t argument_index) const {
  size_t n = 0;
  for (const LabeledPair& p : PairsOf(argument_index)) {
    if (p.label == Label::kMatch) ++n;
  }
  return n;
}

Dataset ParseDataset(const CsvTable& table, const ColumnMap& columns) {
  auto require = [&](const std::string& name, const char* role) {
    auto idx = table.Column(name);
    if (!idx) {
      throw ValidationError("missing column '" + name + "' for role " + role);
    }
    return *idx;
  };
  auto optional_column = [&](const std::string& name,
                             const char* role) -> std::optional<size_t> {
    if (name.empty()) return std::nullopt;
    return require(name, role);
  };
  const size_t c_arg_id = require(columns.argument_id, "argument id");
  const size_t c_kp_id = require(columns.key_point_id, "key point id");
  const size_t c_arg_text = require(columns.argument_text, "argument text");
  const size_t c_kp_text = require(columns.key_point_text, "key point text");
  const size_t c_topic = require(columns.topic, "topic");
  const size_t c_stance = require(columns.stance, "stance");
  const size_t c_label = require(columns.label, "label");
  const auto c_quality = optional_column(columns.quality, "quality");
  const auto c_kp_topic =
      optional_column(columns.key_point_topic, "key point topic");
  const auto c_kp_stance =
      optional_column(columns.key_point_stance, "key point stance");

  std::map<std::string, Argument> arguments;
  std::map<std::string, KeyPoint> key_points;
  std::set<std::pair<std::string, std::string>> seen_pairs;
  std::vector<LabeledPair> pairs;
  pairs.reserve(table.rows.size());

  for (const CsvRecord& row : table.rows) {
    const std::string tag = RowTag(row.line);
    if (row.fields.size() != table.header.size()) {
      throw ValidationError("expected " + std::to_string(table.header.size()) +
                            " fields, found " +
                            std::to_string(row.fields.size()) + tag);
    }
    auto stance_at = [&](size_t column) {
      try {
        return ParseStance(row.fields[column]);
      } catch (const ValidationError& e) {
        throw ValidationError(e.what() + tag);
      }
    };
    Argument a;
    a.id = row.fields[c_arg_id];
    a.text = row.fields[c_arg_text];
    a.topic = row.fields[c_topic];
    a.stance = stance_at(c_stance);
    if (c_quality && !row.fields[*c_quality].empty()) {
      auto q = ParseDouble(row.fields[*c_quality]);
      if (!q || !(*q >= 0.0 && *q <= 1.0)) {
        throw ValidationError("invalid quality '" + row.fields[*c_quality] +
                              "'" + tag);
      }
      a.quality = q;
    }
    KeyPoint k;
    k.id = row.fields[c_kp_id];
    k.text = row.fields[c_kp_text];
    k.topic = c_kp_topic ? row.fields[*c_kp_topic] : a.topic;
    k.stance = c_kp_stance ? stance_at(*c_kp_stance) : a.stance;
    const Label label = ParseLabel(row.fields[c_label], row.line);

    if (a.id.empty()) throw ValidationError("empty argument id" + tag);
    if (k.id.empty()) throw ValidationError("empty key point id" + tag);
    if (Trim(a.text).empty()) throw ValidationError("empty argument text" + tag);
    if (Trim(k.text).empty()) {
      throw ValidationError("empty key point text" + tag);
    }

    auto [ait, a_new] = arguments.emplace(a.id, a);
    if (!a_new) {
      if (ait->second.stance != a.stance) {
        throw ValidationError("stance mismatch" + tag + ": argument '" + a.id +
                              "' seen earlier with another stance");
      }
      if (ait->second.topic != a.topic) {
        throw ValidationError("topic mismatch" + tag + ": argument '" + a.id +
                              "' seen earlier with another topic");
      }
      if (ait->second.text != a.text || ait->second.quality != a.quality) {
        throw ValidationError("conflicting record for argument '" + a.id +
                              "'" + tag);
      }
    }
    auto [kit, k_new] = key_points.emplace(k.id, k);
    if (!k_new) {
      if (kit->second.stance != k.stance) {
        throw ValidationError("stance mismatch" + tag + ": key point '" +
                              k.id + "' seen earlier with another stance");
      }
      if (kit->second.topic != k.topic) {
        throw ValidationError("topic mismatch" + tag + ": key point '" + k.id +
                              "' seen earlier with another topic");
      }
      if (kit->second.text != k.text) {
        throw ValidationError("conflicting record for key point '" + k.id +
                              "'" + tag);
      }
    }
    if (ait->second.stance != kit->second.stance) {
      throw ValidationError("stance mismatch" + tag + ": argument '" + a.id +
                            "' and key point '" + k.id + "'");
    }
    if (ait->second.topic != kit->second.topic) {
      throw ValidationError("topic mismatch" + tag + ": argument '" + a.id +
                            "' and key point '" + k.id + "'");
    }
    if (!seen_pairs.emplace(a.id, k.id).second) {
      throw ValidationError("duplicate pair (" + a.id + ", " + k.id + ")" +
                            tag);
    }
    pairs.push_back({a.id, k.id, label});
  }

  std::vector<Argument> arg_list;
  arg_list.reserve(arguments.size());
  for (auto& [id, a] : arguments) arg_list.push_back(std::move(a));
  std::vector<KeyPoint> kp_list;
  kp_list.reserve(key_points.size());
  for (auto& [id, k] : key_points) kp_list.push_back(std::move(k));
  return Dataset::Build(std::move(arg_list), std::move(kp_list),
                        std::move(pairs));
}

Dataset LoadDataset(const std::string& path, const ColumnMap& columns) {
  const CsvTable table = ReadCsvFile(path);
  try {
    return ParseDataset(table, columns);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::string FormatDataset(const Dataset& dataset) {
  const bool with_quality =
      std::any_of(dataset.arguments().begin(), dataset.arguments().end(),
                  [](const Argument& a) { return a.quality.has_value(); });
  const ColumnMap names;
  std::ostringstream out;
  std::vector<std::string> header = {
      names.argument_id, names.key_point_id, names.argument_text,
      names.key_point_text, names.topic, names.stance, names.label};
  if (with_quality) header.push_back("quality");
  WriteCsvRow(out, header);
  for (const LabeledPair& p : dataset.pairs()) {
    const Argument& a = *dataset.FindArgument(p.argument_id);
    const KeyPoint& k = *dataset.FindKeyPoint(p.key_point_id);
    std::vector<std::string> row = {
        a.id,    k.id,
        a.text,  k.text,
        a.topic, std::string(StanceName(a.stance)),
        p.label == Label::kMatch ? "1" : "0"};
    if (with_quality) row.push_back(a.quality ? FormatDouble(*a.quality) : "");
    WriteCsvRow(out, row);
  }
  return out.str();
}

void WriteDataset(const Dataset& dataset, const std::string& path) {
  WriteFile(path, FormatDataset(dataset));
}

DatasetStats ComputeDatasetStats(const Dataset& dataset) {
  DatasetStats s;
  s.pair_count = dataset.pairs().size();
  for (const LabeledPair& p : dataset.pairs()) {
    if (p.label == Label::kMatch) ++s.positive_count;
  }
  if (s.pair_count > 0) {
    s.positive_rate = static_cast<double>(s.positive_count) /
                      static_cast<double>(s.pair_count);
  }
  s.argument_count = dataset.arguments().size();
  s.key_point_count = dataset.key_points().size();
  s.topic_count = dataset.topics().size();
  if (s.topic_count > 0) {
    const auto topics = static_cast<double>(s.topic_count);
    s.key_points_per_topic = static_cast<double>(s.key_point_count) / topics;
    s.arguments_per_topic = static_cast<double>(s.argument_count) / topics;
  }
  return s;
}

Category CategoryForMatchCount(size_t match_count) {
  if (match_count == 0) return Category::kNoKeyPoint;
  if (match_count == 1) return Category::kSingle;
  return Category::kMultiple;
}

Category CategoryOf(const Dataset& dataset, std::string_view argument_id) {
  auto idx = dataset.ArgumentIndex(argument_id);
  if (!idx) {
    throw ValidationError("unknown argument id '" + std::string(argument_id) +
                          "'");
  }
  return CategoryForMatchCount(dataset.MatchCount(*idx));
}

std::vector<CategoryTextStats> ComputeCategoryTextStats(const Dataset& dataset) {
  struct Acc {
    size_t count = 0;
    size_t quality_count = 0;
    double quality_sum = 0.0;
    double tokens = 0.0;
    double sentences = 0.0;
  };
  Acc acc[3];
  for (size_t i = 0; i < dataset.arguments().size(); ++i) {
    const Argument& a = dataset.arguments()[i];
    Acc& c = acc[static_cast<int>(CategoryForMatchCount(dataset.MatchCount(i)))];
    ++c.count;
    if (a.quality) {
      ++c.quality_count;
      c.quality_sum += *a.quality;
    }
    c.tokens += static_cast<double>(Tokenize(a.text).size());
    c.sentences += static_cast<double>(SplitSentences(a.text).size());
  }
  const auto total = static_cast<double>(dataset.arguments().size());
  std::vector<CategoryTextStats> out;
  for (int c = 0; c < 3; ++c) {
    if (acc[c].count == 0) continue;
    const auto n = static_cast<double>(acc[c].count);
    CategoryTextStats s;
    s.category = static_cast<Category>(c);
    s.argument_count = acc[c].count;
    s.fraction = n / total;
    if (acc[c].quality_count > 0) {
      s.mean_quality =
          acc[c].quality_sum / static_cast<double>(acc[c].quality_count);
    }
    s.mean_tokens = acc[c].tokens / n;
    s.mean_sentences = acc[c].sentences / n;
    out.push_back(s);
  }
  return out;
}

}  // namespace kpm
