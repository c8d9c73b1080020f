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

#include "kpm/annotation.h"

#include <algorithm>
#include <array>
#include <cstdint>

#include "kpm/errors.h"
#include "kpm/text.h"

namespace kpm {
namespace {

// Contingency cell index: 2 * label_a + label_b.
using Contingency = std::array<int64_t, 4>;

std::optional<double> KappaFromCounts(const Contingency& c) {
  const int64_t n = c[0] + c[1] + c[2] + c[3];
  if (n == 0) return std::nullopt;
  const int64_t agree = c[0] + c[3];
  const int64_t a1 = c[2] + c[3];
  const int64_t b1 = c[1] + c[3];
  const int64_t chance = a1 * b1 + (n - a1) * (n - b1);  // p_e * n^2
  if (chance == n * n) return std::nullopt;
  return static_cast<double>(n * agree - chance) /
         static_cast<double>(n * n - chance);
}

std::string Where(const CsvRecord& row) {
  return " at row " + std::to_string(row.line);
}

size_t RequireColumn(const CsvTable& table, const char* name) {
  auto idx = table.Column(name);
  if (!idx) throw ValidationError(std::string("missing column '") + name + "'");
  return *idx;
}

void CheckWidth(const CsvTable& table, const CsvRecord& row) {
  if (row.fields.size() != table.header.size()) {
    throw ValidationError("expected " + std::to_string(table.header.size()) +
                          " fields, found " +
                          std::to_string(row.fields.size()) + Where(row));
  }
}

Stance StanceAt(const CsvRecord& row, size_t column) {
  try {
    return ParseStance(row.fields[column]);
  } catch (const ValidationError& e) {
    throw ValidationError(e.what() + Where(row));
  }
}

template <typename T, typename Parse>
std::vector<T> LoadWith(const std::string& path, Parse parse) {
  const CsvTable table = ReadCsvFile(path);
  try {
    return parse(table);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace

CandidateIndex::CandidateIndex(const std::vector<Argument>& arguments,
                               const std::vector<KeyPoint>& key_points) {
  std::map<std::pair<std::string, Stance>, std::vector<std::string>> by_side;
  for (const KeyPoint& k : key_points) {
    by_side[{k.topic, k.stance}].push_back(k.id);
  }
  for (auto& [side, ids] : by_side) std::sort(ids.begin(), ids.end());
  for (const Argument& a : arguments) {
    auto it = by_side.find({a.topic, a.stance});
    candidates_[a.id] = it == by_side.end() ? std::vector<std::string>{}
                                            : it->second;
  }
}

const std::vector<std::string>& CandidateIndex::Of(
    const std::string& argument_id) const {
  static const std::vector<std::string> kEmpty;
  auto it = candidates_.find(argument_id);
  return it == candidates_.end() ? kEmpty : it->second;
}

std::optional<double> CohenKappa(std::span<const int> labels_a,
                                 std::span<const int> labels_b) {
  if (labels_a.size() != labels_b.size()) {
    throw ValidationError("cohen kappa: label sequences differ in length");
  }
  if (labels_a.empty()) throw ValidationError("cohen kappa: empty sequences");
  Contingency c{};
  for (size_t i = 0; i < labels_a.size(); ++i) {
    const int a = labels_a[i];
    const int b = labels_b[i];
    if ((a != 0 && a != 1) || (b != 0 && b != 1)) {
      throw ValidationError("cohen kappa: labels must be 0 or 1");
    }
    ++c[static_cast<size_t>(2 * a + b)];
  }
  return KappaFromCounts(c);
}

std::optional<double> FleissKappa(std::span<const std::vector<int>> counts) {
  if (counts.empty()) throw ValidationError("fleiss kappa: no items");
  const size_t categories = counts.front().size();
  std::vector<int64_t> category_totals(categories, 0);
  int64_t grand_total = 0;
  double agreement_sum = 0.0;
  for (size_t i = 0; i < counts.size(); ++i) {
    const std::vector<int>& row = counts[i];
    if (row.size() != categories) {
      throw ValidationError("fleiss kappa: ragged count matrix");
    }
    int64_t raters = 0;
    int64_t squares = 0;
    for (size_t j = 0; j < categories; ++j) {
      if (row[j] < 0) throw ValidationError("fleiss kappa: negative count");
      raters += row[j];
      squares += int64_t{row[j]} * row[j];
      category_totals[j] += row[j];
    }
    if (raters < 2) {
      throw ValidationError("fleiss kappa: item " + std::to_string(i) +
                            " has fewer than 2 ratings");
    }
    grand_total += raters;
    agreement_sum += static_cast<double>(squares - raters) /
                     static_cast<double>(raters * (raters - 1));
  }
  for (int64_t t : category_totals) {
    if (t == grand_total) return std::nullopt;
  }
  double expected = 0.0;
  for (int64_t t : category_totals) {
    const double p = static_cast<double>(t) / static_cast<double>(grand_total);
    expected += p * p;
  }
  const double observed = agreement_sum / static_cast<double>(counts.size());
  return (observed - expected) / (1.0 - expected);
}

BinaryDecisions ExpandBinary(std::span<const RawJudgment> judgments,
                             const CandidateIndex& candidates) {
  BinaryDecisions out;
  for (const RawJudgment& j : judgments) {
    if (!candidates.Contains(j.argument_id)) {
      throw ValidationError("unknown argument '" + j.argument_id + "'");
    }
    const auto& ids = candidates.Of(j.argument_id);
    for (const std::string& k : j.selected_key_point_ids) {
      if (!std::binary_search(ids.begin(), ids.end(), k)) {
        throw ValidationError("key point '" + k +
                              "' is not a candidate of argument '" +
                              j.argument_id + "'");
      }
    }
    auto& mine = out[j.annotator_id];
    for (const std::string& k : ids) {
      mine[{j.argument_id, k}] = j.selected_key_point_ids.count(k) ? 1 : 0;
    }
  }
  return out;
}

std::map<std::string, std::optional<double>> AnnotatorKappa(
    const BinaryDecisions& decisions, int min_shared, int min_partners) {
  std::vector<const std::string*> names;
  std::map<std::pair<std::string, std::string>,
           std::vector<std::pair<size_t, int>>>
      raters_by_item;
  for (const auto& [annotator, items] : decisions) {
    const size_t idx = names.size();
    names.push_back(&annotator);
    for (const auto& [item, value] : items) {
      raters_by_item[item].emplace_back(idx, value);
    }
  }

  std::map<std::pair<size_t, size_t>, Contingency> tables;
  for (const auto& [item, raters] : raters_by_item) {
    for (size_t x = 0; x < raters.size(); ++x) {
      for (size_t y = x + 1; y < raters.size(); ++y) {
        auto [a, va] = raters[x];
        auto [b, vb] = raters[y];
        if (a > b) {
          std::swap(a, b);
          std::swap(va, vb);
        }
        ++tables[{a, b}][static_cast<size_t>(2 * va + vb)];
      }
    }
  }

  std::vector<std::vector<double>> partner_kappas(names.size());
  for (const auto& [annotators, table] : tables) {
    if (table[0] + table[1] + table[2] + table[3] < min_shared) continue;
    auto kappa = KappaFromCounts(table);
    if (!kappa) continue;
    partner_kappas[annotators.first].push_back(*kappa);
    partner_kappas[annotators.second].push_back(*kappa);
  }

  std::map<std::string, std::optional<double>> out;
  for (size_t i = 0; i < names.size(); ++i) {
    const auto& values = partner_kappas[i];
    std::optional<double> score;
    if (static_cast<int>(values.size()) >= min_partners && !values.empty()) {
      double sum = 0.0;
      for (double v : values) sum += v;
      score = sum / static_cast<double>(values.size());
    }
    out[*names[i]] = score;
  }
  return out;
}

FilterResult FilterAnnotators(std::span<const RawJudgment> judgments,
                              const GoldStances& gold_stance,
                              const CandidateIndex& candidates,
                              const FilterOptions& options) {
  std::map<std::string, AnnotatorReport> reports;
  for (const RawJudgment& j : judgments) {
    auto gold = gold_stance.find(j.argument_id);
    if (gold == gold_stance.end()) {
      throw ValidationError("no gold stance for argument '" + j.argument_id +
                            "'");
    }
    AnnotatorReport& r = reports[j.annotator_id];
    r.annotator_id = j.annotator_id;
    ++r.judgments;
    if (j.stance_answer != gold->second) ++r.stance_errors;
  }
  for (auto& [id, r] : reports) {
    r.stance_error_rate =
        static_cast<double>(r.stance_errors) / static_cast<double>(r.judgments);
    r.removed_for_stance = r.stance_error_rate > options.max_stance_error;
  }

  std::vector<RawJudgment> stance_ok;
  for (const RawJudgment& j : judgments) {
    if (!reports[j.annotator_id].removed_for_stance) stance_ok.push_back(j);
  }
  const auto kappas =
      AnnotatorKappa(ExpandBinary(stance_ok, candidates), options.min_shared,
                     options.min_partners);
  for (const auto& [id, kappa] : kappas) {
    AnnotatorReport& r = reports[id];
    r.kappa = kappa;
    r.removed_for_kappa = kappa && *kappa < options.min_kappa;
  }

  FilterResult result;
  for (const RawJudgment& j : stance_ok) {
    if (!reports[j.annotator_id].removed_for_kappa) result.retained.push_back(j);
  }
  for (auto& [id, r] : reports) result.annotators.push_back(std::move(r));
  return result;
}

std::vector<RawJudgment> Cleanse(std::span<const RawJudgment> judgments,
                                 const GoldStances& gold_stance) {
  std::vector<RawJudgment> out;
  for (const RawJudgment& j : judgments) {
    auto gold = gold_stance.find(j.argument_id);
    if (gold == gold_stance.end() || gold->second != j.stance_answer) continue;
    if (j.IsIllegal()) continue;
    out.push_back(j);
  }
  return out;
}

std::string_view AnnotationCategoryName(AnnotationCategory category) {
  switch (category) {
    case AnnotationCategory::kNoKeyPoint: return "no_key_point";
    case AnnotationCategory::kAmbiguous: return "ambiguous";
    case AnnotationCategory::kSingle: return "single";
    case AnnotationCategory::kMultiple: return "multiple";
  }
  return "";
}

std::vector<ConsolidatedArgument> Consolidate(
    std::span<const RawJudgment> judgments, double majority,
    int min_judgments) {
  std::map<std::string, std::vector<const RawJudgment*>> by_argument;
  for (const RawJudgment& j : judgments) {
    by_argument[j.argument_id].push_back(&j);
  }
  std::vector<ConsolidatedArgument> out;
  for (const auto& [argument_id, group] : by_argument) {
    const size_t n = group.size();
    if (static_cast<int64_t>(n) < min_judgments) continue;
    std::map<std::string, size_t> votes;
    size_t none_votes = 0;
    for (const RawJudgment* j : group) {
      if (j->selected_key_point_ids.empty()) ++none_votes;
      for (const std::string& k : j->selected_key_point_ids) ++votes[k];
    }
    const auto total = static_cast<double>(n);
    ConsolidatedArgument c;
    c.argument_id = argument_id;
    c.valid_judgments = n;
    for (const auto& [k, count] : votes) {
      if (static_cast<double>(count) / total >= majority) {
        c.matched_key_point_ids.insert(k);
      }
    }
    if (static_cast<double>(none_votes) / total >= majority) {
      c.category = AnnotationCategory::kNoKeyPoint;
    } else if (c.matched_key_point_ids.empty()) {
      c.category = AnnotationCategory::kAmbiguous;
    } else if (c.matched_key_point_ids.size() == 1) {
      c.category = AnnotationCategory::kSingle;
    } else {
      c.category = AnnotationCategory::kMultiple;
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<LabelScore> ComputeLabelScores(
    std::span<const RawJudgment> judgments, const CandidateIndex& candidates,
    int min_judgments) {
  std::map<std::string, std::vector<const RawJudgment*>> by_argument;
  for (const RawJudgment& j : judgments) {
    by_argument[j.argument_id].push_back(&j);
  }
  std::vector<LabelScore> out;
  for (const auto& [argument_id, group] : by_argument) {
    if (!candidates.Contains(argument_id)) {
      throw ValidationError("unknown argument '" + argument_id + "'");
    }
    const auto& ids = candidates.Of(argument_id);
    std::map<std::string, size_t> votes;
    for (const RawJudgment* j : group) {
      for (const std::string& k : j->selected_key_point_ids) {
        if (!std::binary_search(ids.begin(), ids.end(), k)) {
          throw ValidationError("key point '" + k +
                                "' is not a candidate of argument '" +
                                argument_id + "'");
        }
        ++votes[k];
      }
    }
    if (static_cast<int64_t>(group.size()) < min_judgments) continue;
    const auto total = static_cast<double>(group.size());
    for (const std::string& k : ids) {
      auto it = votes.find(k);
      const size_t count = it == votes.end() ? 0 : it->second;
      out.push_back({argument_id, k, static_cast<double>(count) / total});
    }
  }
  return out;
}

std::vector<LabeledPair> GeneratePairs(std::span<const LabelScore> scores,
                                       double positive_min,
                                       double negative_max,
                                       int min_matches_per_kp) {
  std::vector<LabeledPair> labeled;
  std::map<std::string, int64_t> positives;
  for (const LabelScore& s : scores) {
    if (s.score >= positive_min) {
      labeled.push_back({s.argument_id, s.key_point_id, Label::kMatch});
      ++positives[s.key_point_id];
    } else if (s.score <= negative_max) {
      labeled.push_back({s.argument_id, s.key_point_id, Label::kNoMatch});
    }
  }
  std::erase_if(labeled, [&](const LabeledPair& p) {
    auto it = positives.find(p.key_point_id);
    return it == positives.end() || it->second < min_matches_per_kp;
  });
  std::sort(labeled.begin(), labeled.end(),
            [](const LabeledPair& a, const LabeledPair& b) {
              return std::tie(a.argument_id, a.key_point_id) <
                     std::tie(b.argument_id, b.key_point_id);
            });
  return labeled;
}

AnnotationRun RunAnnotationPipeline(std::span<const RawJudgment> judgments,
                                    const std::vector<Argument>& arguments,
                                    const std::vector<KeyPoint>& key_points,
                                    const AnnotationOptions& options) {
  const CandidateIndex candidates(arguments, key_points);
  GoldStances gold;
  for (const Argument& a : arguments) gold[a.id] = a.stance;

  AnnotationRun run;
  run.raw_judgments = judgments.size();
  size_t correct = 0;
  for (const RawJudgment& j : judgments) {
    auto it = gold.find(j.argument_id);
    if (it != gold.end() && it->second == j.stance_answer) ++correct;
  }
  if (!judgments.empty()) {
    run.stance_accuracy =
        static_cast<double>(correct) / static_cast<double>(judgments.size());
  }

  run.filter = FilterAnnotators(judgments, gold, candidates, options.filter);
  run.valid = Cleanse(run.filter.retained, gold);
  run.consolidated =
      Consolidate(run.valid, options.majority, options.min_judgments);
  run.label_scores =
      ComputeLabelScores(run.valid, candidates, options.min_judgments);
  std::vector<LabeledPair> pairs =
      GeneratePairs(run.label_scores, options.positive_min,
                    options.negative_max, options.min_matches_per_kp);

  std::set<std::string> used_arguments, used_key_points;
  for (const LabeledPair& p : pairs) {
    used_arguments.insert(p.argument_id);
    used_key_points.insert(p.key_point_id);
  }
  std::vector<Argument> kept_arguments;
  for (const Argument& a : arguments) {
    if (used_arguments.count(a.id)) kept_arguments.push_back(a);
  }
  std::vector<KeyPoint> kept_key_points;
  for (const KeyPoint& k : key_points) {
    if (used_key_points.count(k.id)) kept_key_points.push_back(k);
  }
  run.dataset = Dataset::Build(std::move(kept_arguments),
                               std::move(kept_key_points), std::move(pairs));

  // Agreement over the valid binary decisions.
  std::map<std::pair<std::string, std::string>, std::vector<int>> items;
  for (const auto& [annotator, decisions] : ExpandBinary(run.valid, candidates)) {
    for (const auto& [item, value] : decisions) {
      auto& row = items[item];
      if (row.empty()) row.assign(2, 0);
      ++row[static_cast<size_t>(value)];
    }
  }
  std::vector<std::vector<int>> matrix;
  for (auto& [item, row] : items) {
    if (row[0] + row[1] >= 2) matrix.push_back(std::move(row));
  }
  if (!matrix.empty()) run.fleiss_kappa = FleissKappa(matrix);

  double kappa_sum = 0.0;
  size_t kappa_count = 0;
  for (const AnnotatorReport& r : run.filter.annotators) {
    if (r.removed_for_stance || r.removed_for_kappa || !r.kappa) continue;
    kappa_sum += *r.kappa;
    ++kappa_count;
  }
  if (kappa_count > 0) {
    run.mean_annotator_kappa = kappa_sum / static_cast<double>(kappa_count);
  }
  return run;
}

std::vector<RawJudgment> ParseJudgments(const CsvTable& table) {
  const size_t c_annotator = RequireColumn(table, "annotator_id");
  const size_t c_argument = RequireColumn(table, "argument_id");
  const size_t c_selected = RequireColumn(table, "selected");
  const size_t c_stance = RequireColumn(table, "stance_answer");
  std::vector<RawJudgment> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const CsvRecord& row : table.rows) {
    CheckWidth(table, row);
    RawJudgment j;
    j.annotator_id = row.fields[c_annotator];
    j.argument_id = row.fields[c_argument];
    if (j.annotator_id.empty() || j.argument_id.empty()) {
      throw ValidationError("empty annotator or argument id" + Where(row));
    }
    std::string_view rest = row.fields[c_selected];
    while (true) {
      const size_t bar = rest.find('|');
      std::string_view token = Trim(rest.substr(0, bar));
      if (token == "NONE" || token == "None") {
        j.selected_none = true;
      } else if (!token.empty()) {
        j.selected_key_point_ids.emplace(token);
      }
      if (bar == std::string_view::npos) break;
      rest.remove_prefix(bar + 1);
    }
    j.stance_answer = StanceAt(row, c_stance);
    if (!seen.emplace(j.annotator_id, j.argument_id).second) {
      throw ValidationError("duplicate judgment by '" + j.annotator_id +
                            "' for argument '" + j.argument_id + "'" +
                            Where(row));
    }
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<RawJudgment> LoadJudgments(const std::string& path) {
  return LoadWith<RawJudgment>(path, ParseJudgments);
}

std::vector<Argument> ParseArguments(const CsvTable& table) {
  const size_t c_id = RequireColumn(table, "argument_id");
  const size_t c_text = RequireColumn(table, "argument");
  const size_t c_topic = RequireColumn(table, "topic");
  const size_t c_stance = RequireColumn(table, "stance");
  const auto c_quality = table.Column("quality");
  std::vector<Argument> out;
  std::set<std::string> seen;
  for (const CsvRecord& row : table.rows) {
    CheckWidth(table, row);
    Argument a;
    a.id = row.fields[c_id];
    a.text = row.fields[c_text];
    a.topic = row.fields[c_topic];
    a.stance = StanceAt(row, c_stance);
    if (c_quality && !row.fields[*c_quality].empty()) {
      a.quality = ParseDouble(row.fields[*c_quality]);
      if (!a.quality || !(*a.quality >= 0.0 && *a.quality <= 1.0)) {
        throw ValidationError("invalid quality" + Where(row));
      }
    }
    if (a.id.empty() || Trim(a.text).empty()) {
      throw ValidationError("empty argument id or text" + Where(row));
    }
    if (!seen.insert(a.id).second) {
      throw ValidationError("duplicate argument id '" + a.id + "'" + Where(row));
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<Argument> LoadArguments(const std::string& path) {
  return LoadWith<Argument>(path, ParseArguments);
}

std::vector<KeyPoint> ParseKeyPoints(const CsvTable& table) {
  const size_t c_id = RequireColumn(table, "key_point_id");
  const size_t c_text = RequireColumn(table, "key_point");
  const size_t c_topic = RequireColumn(table, "topic");
  const size_t c_stance = RequireColumn(table, "stance");
  std::vector<KeyPoint> out;
  std::set<std::string> seen;
  for (const CsvRecord& row : table.rows) {
    CheckWidth(table, row);
    KeyPoint k;
    k.id = row.fields[c_id];
    k.text = row.fields[c_text];
    k.topic = row.fields[c_topic];
    k.stance = StanceAt(row, c_stance);
    if (k.id.empty() || Trim(k.text).empty()) {
      throw ValidationError("empty key point id or text" + Where(row));
    }
    if (!seen.insert(k.id).second) {
      throw ValidationError("duplicate key point id '" + k.id + "'" +
                            Where(row));
    }
    out.push_back(std::move(k));
  }
  return out;
}

std::vector<KeyPoint> LoadKeyPoints(const std::string& path) {
  return LoadWith<KeyPoint>(path, ParseKeyPoints);
}

}  // namespace kpm
