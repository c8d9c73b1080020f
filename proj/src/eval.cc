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

#include "kpm/eval.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "kpm/errors.h"

namespace kpm {
namespace {

bool InScope(std::span<const std::string> topics, const std::string& topic) {
  return topics.empty() ||
         std::find(topics.begin(), topics.end(), topic) != topics.end();
}

// Unbiased draw in [0, bound) from the raw engine output, so results do not
// depend on the standard library's distribution implementation.
uint64_t UniformIndex(std::mt19937_64& rng, uint64_t bound) {
  const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

double UniformUnit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::optional<double> Ratio(int64_t num, int64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

// Ranked candidates of one in-scope argument with their gold labels.
struct RankedArgument {
  std::vector<double> scores;
  std::vector<bool> positive;
  int64_t positives = 0;
};

std::vector<RankedArgument> RankScope(const ScoreTable& scores,
                                      const Dataset& dataset,
                                      std::span<const std::string> scope) {
  std::vector<RankedArgument> out;
  for (size_t i = 0; i < dataset.arguments().size(); ++i) {
    if (!InScope(scope, dataset.arguments()[i].topic)) continue;
    if (dataset.PairsOf(i).empty()) continue;
    std::vector<Candidate> candidates = CandidatesOf(scores, dataset, i);
    RankCandidates(candidates);
    RankedArgument ranked;
    for (const Candidate& c : candidates) {
      ranked.scores.push_back(c.score);
      const bool pos = std::any_of(
          dataset.PairsOf(i).begin(), dataset.PairsOf(i).end(),
          [&](const LabeledPair& p) {
            return p.key_point_id == c.key_point_id && p.label == Label::kMatch;
          });
      ranked.positive.push_back(pos);
      ranked.positives += pos ? 1 : 0;
    }
    out.push_back(std::move(ranked));
  }
  return out;
}

Metrics RankedMetrics(const PolicyConfig& config,
                      std::span<const RankedArgument> arguments) {
  int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (const RankedArgument& a : arguments) {
    const size_t n = SelectionSize(config, a.scores);
    int64_t hit = 0;
    for (size_t i = 0; i < n; ++i) hit += a.positive[i] ? 1 : 0;
    const auto selected = static_cast<int64_t>(n);
    const auto total = static_cast<int64_t>(a.scores.size());
    tp += hit;
    fp += selected - hit;
    fn += a.positives - hit;
    tn += total - selected - (a.positives - hit);
  }
  return Metrics::FromCounts(tp, fp, fn, tn);
}

Averages MeanOver(std::span<const Metrics> per_fold) {
  auto mean = [&](auto field) -> std::optional<double> {
    double sum = 0.0;
    int n = 0;
    for (const Metrics& m : per_fold) {
      if (auto v = field(m)) {
        sum += *v;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
  };
  Averages a;
  a.accuracy = mean([](const Metrics& m) { return m.accuracy; });
  a.precision = mean([](const Metrics& m) { return m.precision; });
  a.recall = mean([](const Metrics& m) { return m.recall; });
  a.f1 = mean([](const Metrics& m) { return m.f1; });
  return a;
}

}  // namespace

std::vector<Fold> MakeFolds(std::span<const std::string> topics, uint64_t seed,
                            bool strict) {
  const size_t n = topics.size();
  if (strict && n != 28) {
    throw ValidationError("expected 28 topics for the standard split, got " +
                          std::to_string(n));
  }
  if (n < 4 || n % 4 != 0) {
    throw ValidationError("topic count must be a positive multiple of 4, got " +
                          std::to_string(n));
  }
  std::vector<std::string> order(topics.begin(), topics.end());
  {
    std::vector<std::string> check = order;
    std::sort(check.begin(), check.end());
    if (std::adjacent_find(check.begin(), check.end()) != check.end()) {
      throw ValidationError("duplicate topic in fold construction");
    }
  }
  std::mt19937_64 rng(seed);
  for (size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[UniformIndex(rng, i + 1)]);
  }

  const size_t test_size = n / 4;
  const size_t rest = n - test_size;
  // 4 dev topics out of 21 in the standard split.
  const size_t dev_size = std::clamp<size_t>(
      static_cast<size_t>(std::lround(static_cast<double>(rest) * 4.0 / 21.0)),
      1, rest - 1);

  std::vector<Fold> folds;
  for (size_t f = 0; f < 4; ++f) {
    Fold fold;
    fold.index = static_cast<int>(f);
    std::vector<std::string> remaining;
    for (size_t i = 0; i < n; ++i) {
      if (i / test_size == f) {
        fold.test_topics.push_back(order[i]);
      } else {
        remaining.push_back(order[i]);
      }
    }
    fold.dev_topics.assign(remaining.begin(), remaining.begin() + dev_size);
    fold.train_topics.assign(remaining.begin() + dev_size, remaining.end());
    std::sort(fold.test_topics.begin(), fold.test_topics.end());
    std::sort(fold.dev_topics.begin(), fold.dev_topics.end());
    std::sort(fold.train_topics.begin(), fold.train_topics.end());
    folds.push_back(std::move(fold));
  }
  return folds;
}

Metrics Metrics::FromCounts(int64_t tp, int64_t fp, int64_t fn, int64_t tn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  m.accuracy = Ratio(tp + tn, tp + fp + fn + tn);
  m.precision = Ratio(tp, tp + fp);
  m.recall = Ratio(tp, tp + fn);
  if (m.precision && m.recall) {
    const double p = *m.precision, r = *m.recall;
    m.f1 = p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
  return m;
}

Metrics PairMetrics(const PredictionMap& predictions, const Dataset& gold,
                    std::span<const std::string> scope) {
  int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (size_t i = 0; i < gold.arguments().size(); ++i) {
    const Argument& a = gold.arguments()[i];
    if (!InScope(scope, a.topic) || gold.PairsOf(i).empty()) continue;
    auto it = predictions.find(a.id);
    if (it == predictions.end()) {
      throw ValidationError("no prediction for argument '" + a.id + "'");
    }
    for (const LabeledPair& p : gold.PairsOf(i)) {
      const bool predicted = it->second.matched_key_point_ids.count(p.key_point_id);
      const bool positive = p.label == Label::kMatch;
      if (predicted && positive) ++tp;
      else if (predicted) ++fp;
      else if (positive) ++fn;
      else ++tn;
    }
  }
  return Metrics::FromCounts(tp, fp, fn, tn);
}

CategoryMetrics ComputeCategoryMetrics(const PredictionMap& predictions,
                                       const Dataset& gold,
                                       std::span<const std::string> scope) {
  int64_t counts[3][4] = {};
  for (size_t i = 0; i < gold.arguments().size(); ++i) {
    const Argument& a = gold.arguments()[i];
    if (!InScope(scope, a.topic) || gold.PairsOf(i).empty()) continue;
    auto it = predictions.find(a.id);
    if (it == predictions.end()) {
      throw ValidationError("no prediction for argument '" + a.id + "'");
    }
    auto& c = counts[static_cast<int>(CategoryForMatchCount(gold.MatchCount(i)))];
    for (const LabeledPair& p : gold.PairsOf(i)) {
      const bool predicted = it->second.matched_key_point_ids.count(p.key_point_id);
      const bool positive = p.label == Label::kMatch;
      ++c[predicted ? (positive ? 0 : 1) : (positive ? 2 : 3)];
    }
  }
  auto make = [&](int k) {
    return Metrics::FromCounts(counts[k][0], counts[k][1], counts[k][2],
                               counts[k][3]);
  };
  return {make(0), make(1), make(2)};
}

std::vector<double> DefaultGrid(const ScoreTable& scores,
                                const Dataset& dataset,
                                std::span<const std::string> scope) {
  std::vector<double> grid = {kNoGate, kMatchNothing};
  for (size_t i = 0; i < dataset.arguments().size(); ++i) {
    if (!InScope(scope, dataset.arguments()[i].topic)) continue;
    for (const Candidate& c : CandidatesOf(scores, dataset, i)) {
      grid.push_back(c.score);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

Curve PrCurve(PolicyKind kind, const PolicyConfig& chosen,
              const ScoreTable& scores, const Dataset& dataset,
              std::span<const std::string> scope,
              std::span<const double> grid) {
  if (chosen.kind != kind) {
    throw ValidationError("curve policy differs from the chosen config");
  }
  chosen.Validate();
  const std::vector<RankedArgument> ranked = RankScope(scores, dataset, scope);

  Curve curve;
  curve.kind = kind;
  curve.chosen_config = chosen;
  auto config_at = [&](double t) {
    switch (kind) {
      case PolicyKind::kThreshold: return PolicyConfig::Threshold(t);
      case PolicyKind::kBMThreshold: return PolicyConfig::BMThreshold(t);
      case PolicyKind::kDualThreshold:
        return PolicyConfig::DualThreshold(t, std::max(t, *chosen.theta_high));
      case PolicyKind::kBestMatch: break;
    }
    return PolicyConfig::BestMatch();
  };
  if (kind == PolicyKind::kBestMatch) {
    curve.points.push_back({kNoGate, RankedMetrics(chosen, ranked)});
  } else {
    if (grid.empty()) throw ValidationError("empty threshold grid");
    for (double t : grid) {
      curve.points.push_back({t, RankedMetrics(config_at(t), ranked)});
    }
  }
  for (size_t i = 0; i < curve.points.size(); ++i) {
    const auto& f = curve.points[i].metrics.f1;
    const auto& best = curve.points[curve.best_index].metrics.f1;
    if (f && (!best || *f >= *best)) curve.best_index = i;
  }
  double chosen_threshold = kNoGate;
  if (chosen.theta) chosen_threshold = *chosen.theta;
  if (chosen.theta_low) chosen_threshold = *chosen.theta_low;
  curve.chosen = {chosen_threshold, RankedMetrics(chosen, ranked)};
  return curve;
}

std::vector<CoverageGroup> CoverageGroupsOf(const Dataset& dataset) {
  std::map<std::pair<std::string, Stance>, CoverageGroup> groups;
  auto group_of = [&](const std::string& topic, Stance stance) -> CoverageGroup& {
    CoverageGroup& g = groups[{topic, stance}];
    g.topic = topic;
    g.stance = stance;
    return g;
  };
  for (const KeyPoint& k : dataset.key_points()) {
    group_of(k.topic, k.stance).matches[k.id];
  }
  for (size_t i = 0; i < dataset.arguments().size(); ++i) {
    const Argument& a = dataset.arguments()[i];
    CoverageGroup& g = group_of(a.topic, a.stance);
    ++g.argument_count;
    for (const LabeledPair& p : dataset.PairsOf(i)) {
      if (p.label == Label::kMatch) g.matches[p.key_point_id].insert(a.id);
    }
  }
  std::vector<CoverageGroup> out;
  for (auto& [key, g] : groups) out.push_back(std::move(g));
  return out;
}

std::vector<CoverageGroup> CoverageGroupsOf(
    std::span<const ConsolidatedArgument> consolidated,
    const std::vector<Argument>& arguments,
    const std::vector<KeyPoint>& key_points) {
  std::map<std::string, const Argument*> by_id;
  for (const Argument& a : arguments) by_id[a.id] = &a;
  std::map<std::pair<std::string, Stance>, CoverageGroup> groups;
  for (const KeyPoint& k : key_points) {
    CoverageGroup& g = groups[{k.topic, k.stance}];
    g.topic = k.topic;
    g.stance = k.stance;
    g.matches[k.id];
  }
  for (const ConsolidatedArgument& c : consolidated) {
    auto it = by_id.find(c.argument_id);
    if (it == by_id.end()) {
      throw ValidationError("unknown argument '" + c.argument_id + "'");
    }
    const Argument& a = *it->second;
    CoverageGroup& g = groups[{a.topic, a.stance}];
    g.topic = a.topic;
    g.stance = a.stance;
    ++g.argument_count;
    for (const std::string& k : c.matched_key_point_ids) g.matches[k].insert(a.id);
  }
  std::vector<CoverageGroup> out;
  for (auto& [key, g] : groups) out.push_back(std::move(g));
  return out;
}

std::vector<double> CoverageCurve(std::span<const CoverageGroup> groups) {
  std::vector<std::vector<double>> per_group;
  size_t longest = 0;
  for (const CoverageGroup& g : groups) {
    if (g.argument_count == 0) continue;
    std::vector<std::pair<std::string, const std::set<std::string>*>> ordered;
    for (const auto& [k, matched] : g.matches) ordered.emplace_back(k, &matched);
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
      if (a.second->size() != b.second->size()) {
        return a.second->size() > b.second->size();
      }
      return a.first < b.first;
    });
    std::set<std::string> covered;
    std::vector<double> values;
    for (const auto& [k, matched] : ordered) {
      covered.insert(matched->begin(), matched->end());
      values.push_back(static_cast<double>(covered.size()) /
                       static_cast<double>(g.argument_count));
    }
    if (values.empty()) values.push_back(0.0);
    longest = std::max(longest, values.size());
    per_group.push_back(std::move(values));
  }
  std::vector<double> curve(longest, 0.0);
  for (size_t k = 0; k < longest; ++k) {
    double sum = 0.0;
    for (const auto& values : per_group) {
      sum += values[std::min(k, values.size() - 1)];
    }
    curve[k] = sum / static_cast<double>(per_group.size());
  }
  return curve;
}

ScorerSpec ScorerSpec::TfIdf() {
  return {ScorerKind::kTfIdf, std::nullopt, MethodKind::kUnsupervised, "tfidf"};
}

ScorerSpec ScorerSpec::External(ScoreTable table, MethodKind method) {
  std::string label = "external=" + table.name();
  return {ScorerKind::kExternal, std::move(table), method, std::move(label)};
}

ScorerSpec ScorerSpec::Majority() {
  return {ScorerKind::kMajority, std::nullopt, MethodKind::kSupervised,
          "majority"};
}

ScorerSpec ScorerSpec::Random() {
  return {ScorerKind::kRandom, std::nullopt, MethodKind::kSupervised, "random"};
}

Averages AverageMetrics(std::span<const Metrics> per_fold) {
  return MeanOver(per_fold);
}

FoldScoring ScoreFold(const Dataset& dataset, const ScorerSpec& scorer,
                      const Fold& fold) {
  FoldScoring out;
  out.tuning_topics = TuningTopics(fold, scorer.method);
  switch (scorer.kind) {
    case ScorerKind::kTfIdf: {
      std::vector<std::string> fit = TuningTopics(fold, MethodKind::kUnsupervised);
      out.scores = ScoreDatasetTfIdf(dataset, fit);
      break;
    }
    case ScorerKind::kExternal:
      if (!scorer.external) throw ValidationError("external scorer without scores");
      out.scores = *scorer.external;
      ValidateCoverage(out.scores, dataset);
      break;
    default:
      throw ValidationError("baseline scorers produce no scores");
  }
  return out;
}

EvalReport RunExperiment(const Dataset& dataset, const ScorerSpec& scorer,
                         PolicyKind policy, uint64_t seed,
                         const ExperimentOptions& options) {
  EvalReport report;
  report.scorer = scorer.label;
  report.policy = policy;
  report.seed = seed;
  const std::vector<Fold> folds =
      MakeFolds(dataset.topics(), seed, options.strict_folds);

  std::vector<Metrics> expected_per_fold;
  for (const Fold& fold : folds) {
    FoldResult result;
    result.fold = fold;
    PredictionMap predictions;
    const bool baseline =
        scorer.kind == ScorerKind::kMajority || scorer.kind == ScorerKind::kRandom;
    if (baseline) {
      double rate = 0.0;
      std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL *
                                  static_cast<uint64_t>(fold.index + 1)));
      if (scorer.kind == ScorerKind::kRandom) {
        int64_t pos = 0, total = 0;
        for (size_t i = 0; i < dataset.arguments().size(); ++i) {
          if (!InScope(fold.train_topics, dataset.arguments()[i].topic)) continue;
          for (const LabeledPair& p : dataset.PairsOf(i)) {
            ++total;
            pos += p.label == Label::kMatch ? 1 : 0;
          }
        }
        rate = total ? static_cast<double>(pos) / static_cast<double>(total) : 0.0;
        result.random_rate = rate;
      }
      int64_t test_pos = 0, test_total = 0;
      for (size_t i = 0; i < dataset.arguments().size(); ++i) {
        const Argument& a = dataset.arguments()[i];
        if (!InScope(fold.test_topics, a.topic)) continue;
        Prediction& pred = predictions[a.id];
        pred.argument_id = a.id;
        for (const LabeledPair& p : dataset.PairsOf(i)) {
          ++test_total;
          test_pos += p.label == Label::kMatch ? 1 : 0;
          if (scorer.kind == ScorerKind::kRandom && UniformUnit(rng) < rate) {
            pred.matched_key_point_ids.insert(p.key_point_id);
          }
        }
      }
      if (scorer.kind == ScorerKind::kRandom) {
        // Expected counts of an independent coin with P(match) = rate.
        const double pos = static_cast<double>(test_pos);
        const double neg = static_cast<double>(test_total - test_pos);
        Metrics e;
        e.accuracy = test_total ? std::optional<double>((rate * pos + (1 - rate) * neg) /
                                                        static_cast<double>(test_total))
                                : std::nullopt;
        e.precision = rate > 0 && test_total ? std::optional<double>(pos / (pos + neg))
                                             : std::nullopt;
        e.recall = test_pos ? std::optional<double>(rate) : std::nullopt;
        if (e.precision && e.recall) {
          const double p = *e.precision, r = *e.recall;
          e.f1 = p + r == 0.0 ? 0.0 : 2 * p * r / (p + r);
        }
        result.expected = e;
        expected_per_fold.push_back(e);
      }
    } else {
      FoldScoring scoring = ScoreFold(dataset, scorer, fold);
      const auto tuning =
          CollectTuningData(scoring.scores, dataset, scoring.tuning_topics);
      result.config = LearnPolicy(policy, tuning);
      predictions = PredictAll(*result.config, scoring.scores, dataset,
                               fold.test_topics);
    }
    result.metrics = PairMetrics(predictions, dataset, fold.test_topics);
    result.categories =
        ComputeCategoryMetrics(predictions, dataset, fold.test_topics);
    report.folds.push_back(std::move(result));
  }

  std::vector<Metrics> all, single, multiple, none;
  for (const FoldResult& r : report.folds) {
    all.push_back(r.metrics);
    single.push_back(r.categories.single);
    multiple.push_back(r.categories.multiple);
    none.push_back(r.categories.no_key_point);
  }
  report.averaged = MeanOver(all);
  report.single = MeanOver(single);
  report.multiple = MeanOver(multiple);
  report.no_key_point_accuracy = MeanOver(none).accuracy;
  if (!expected_per_fold.empty()) report.expected = MeanOver(expected_per_fold);
  return report;
}

}  // namespace kpm
