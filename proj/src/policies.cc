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

#include "kpm/policies.h"

#include <cmath>

#include <algorithm>
#include <cstdint>

#include "kpm/errors.h"

namespace kpm {
namespace {

bool InScope(std::span<const std::string> topics, const std::string& topic) {
  return topics.empty() ||
         std::find(topics.begin(), topics.end(), topic) != topics.end();
}

// a/b > c/d for nonnegative a, c and positive b, d.
bool RatioGreater(int64_t a, int64_t b, int64_t c, int64_t d) {
  return a * d > c * b;
}

struct TopTwo {
  double s1 = 0.0;
  bool y1 = false;
  bool has_second = false;
  double s2 = 0.0;
  bool y2 = false;
};

TopTwo TopTwoOf(const ArgumentCandidates& candidates) {
  auto better = [](const ScoredCandidate& a, const ScoredCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.key_point_id < b.key_point_id;
  };
  const ScoredCandidate* first = nullptr;
  const ScoredCandidate* second = nullptr;
  for (const ScoredCandidate& c : candidates) {
    if (!first || better(c, *first)) {
      second = first;
      first = &c;
    } else if (!second || better(c, *second)) {
      second = &c;
    }
  }
  TopTwo t;
  t.s1 = first->score;
  t.y1 = first->positive;
  if (second) {
    t.has_second = true;
    t.s2 = second->score;
    t.y2 = second->positive;
  }
  return t;
}

}  // namespace

std::string_view PolicyName(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kThreshold: return "threshold";
    case PolicyKind::kBestMatch: return "best-match";
    case PolicyKind::kBMThreshold: return "bm-threshold";
    case PolicyKind::kDualThreshold: return "dual-threshold";
  }
  return "";
}

PolicyKind ParsePolicyKind(std::string_view name) {
  for (PolicyKind kind : kAllPolicies) {
    if (PolicyName(kind) == name) return kind;
  }
  throw ValidationError("unknown policy '" + std::string(name) + "'");
}

void PolicyConfig::Validate() const {
  for (const auto& t : {theta, theta_low, theta_high}) {
    if (t && std::isnan(*t)) throw ValidationError("threshold is NaN");
  }
  switch (kind) {
    case PolicyKind::kThreshold:
    case PolicyKind::kBMThreshold:
      if (!theta) {
        throw ValidationError(std::string(PolicyName(kind)) +
                              " policy requires theta");
      }
      break;
    case PolicyKind::kBestMatch:
      break;
    case PolicyKind::kDualThreshold:
      if (!theta_low || !theta_high) {
        throw ValidationError("dual-threshold policy requires two thresholds");
      }
      if (!(*theta_low <= *theta_high)) {
        throw ValidationError("dual-threshold requires theta_low <= theta_high");
      }
      break;
  }
}

void RankCandidates(std::vector<Candidate>& candidates) {
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.key_point_id < b.key_point_id;
            });
}

size_t SelectionSize(const PolicyConfig& config,
                     std::span<const double> ranked_scores) {
  if (ranked_scores.empty()) return 0;
  const double top = ranked_scores.front();
  switch (config.kind) {
    case PolicyKind::kThreshold: {
      size_t n = 0;
      while (n < ranked_scores.size() && ranked_scores[n] >= *config.theta) ++n;
      return n;
    }
    case PolicyKind::kBestMatch:
      return 1;
    case PolicyKind::kBMThreshold:
      return top >= *config.theta ? 1 : 0;
    case PolicyKind::kDualThreshold:
      if (ranked_scores.size() >= 2 && ranked_scores[1] >= *config.theta_low &&
          top >= *config.theta_high) {
        return 2;
      }
      return top >= *config.theta_low ? 1 : 0;
  }
  return 0;
}

std::set<std::string> SelectMatches(const PolicyConfig& config,
                                    std::vector<Candidate> candidates) {
  config.Validate();
  if (candidates.empty()) {
    throw ValidationError("argument has no scored candidates");
  }
  RankCandidates(candidates);
  std::vector<double> ranked;
  ranked.reserve(candidates.size());
  for (const Candidate& c : candidates) ranked.push_back(c.score);
  const size_t n = SelectionSize(config, ranked);
  std::set<std::string> matched;
  for (size_t i = 0; i < n; ++i) matched.insert(candidates[i].key_point_id);
  return matched;
}

std::vector<Candidate> CandidatesOf(const ScoreTable& scores,
                                    const Dataset& dataset,
                                    size_t argument_index) {
  std::vector<Candidate> out;
  for (const LabeledPair& p : dataset.PairsOf(argument_index)) {
    auto score = scores.Get(p.argument_id, p.key_point_id);
    if (!score) {
      throw ValidationError("no score for pair (" + p.argument_id + ", " +
                            p.key_point_id + ")");
    }
    out.push_back({p.key_point_id, *score});
  }
  if (out.empty()) {
    throw ValidationError("argument '" +
                          dataset.arguments()[argument_index].id +
                          "' has no scored candidates");
  }
  return out;
}

Prediction ApplyPolicy(const PolicyConfig& config, const ScoreTable& scores,
                       const Dataset& dataset, std::string_view argument_id) {
  auto idx = dataset.ArgumentIndex(argument_id);
  if (!idx) {
    throw ValidationError("unknown argument '" + std::string(argument_id) +
                          "'");
  }
  return {std::string(argument_id),
          SelectMatches(config, CandidatesOf(scores, dataset, *idx))};
}

std::map<std::string, Prediction> PredictAll(
    const PolicyConfig& config, const ScoreTable& scores,
    const Dataset& dataset, std::span<const std::string> topics) {
  std::map<std::string, Prediction> out;
  for (size_t i = 0; i < dataset.arguments().size(); ++i) {
    const Argument& a = dataset.arguments()[i];
    if (!InScope(topics, a.topic) || dataset.PairsOf(i).empty()) continue;
    out.emplace(a.id, Prediction{a.id, SelectMatches(config, CandidatesOf(
                                                                 scores, dataset, i))});
  }
  return out;
}

ThresholdFit LearnThreshold(std::span<const ScoredLabel> pairs,
                            size_t unreachable_positives) {
  int64_t positives = static_cast<int64_t>(unreachable_positives);
  for (const ScoredLabel& p : pairs) positives += p.positive ? 1 : 0;
  if (positives == 0) {
    throw ValidationError("threshold learning needs at least one positive");
  }
  std::vector<ScoredLabel> sorted(pairs.begin(), pairs.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredLabel& a, const ScoredLabel& b) {
              return a.score > b.score;
            });
  // At +inf nothing is predicted: F1 = 0 / positives.
  ThresholdFit best;
  int64_t best_tp = 0;
  int64_t best_den = positives;
  int64_t tp = 0;
  int64_t predicted = 0;
  for (size_t i = 0; i < sorted.size();) {
    const double theta = sorted[i].score;
    for (; i < sorted.size() && sorted[i].score == theta; ++i) {
      ++predicted;
      if (sorted[i].positive) ++tp;
    }
    const int64_t den = predicted + positives;
    if (RatioGreater(tp, den, best_tp, best_den)) {
      best_tp = tp;
      best_den = den;
      best.theta = theta;
    }
  }
  best.f1 = 2.0 * static_cast<double>(best_tp) / static_cast<double>(best_den);
  return best;
}

ThresholdFit LearnBestMatchThreshold(std::span<const ArgumentCandidates> data) {
  std::vector<ScoredLabel> tops;
  size_t unreachable = 0;
  for (const ArgumentCandidates& candidates : data) {
    if (candidates.empty()) continue;
    size_t positives = 0;
    for (const ScoredCandidate& c : candidates) positives += c.positive ? 1 : 0;
    const TopTwo t = TopTwoOf(candidates);
    tops.push_back({t.s1, t.y1});
    unreachable += positives - (t.y1 ? 1 : 0);
  }
  return LearnThreshold(tops, unreachable);
}

DualThresholdFit LearnDualThresholds(std::span<const ArgumentCandidates> data) {
  // Candidate grid, descending: index 0 is +inf, 1..m the distinct scores.
  std::vector<double> grid;
  int64_t positives = 0;
  for (const ArgumentCandidates& candidates : data) {
    for (const ScoredCandidate& c : candidates) {
      grid.push_back(c.score);
      positives += c.positive ? 1 : 0;
    }
  }
  if (positives == 0) {
    throw ValidationError("threshold learning needs at least one positive");
  }
  grid.push_back(kMatchNothing);
  std::sort(grid.begin(), grid.end(), std::greater<>());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const size_t slots = grid.size();
  auto rank = [&](double s) {
    return static_cast<size_t>(
        std::lower_bound(grid.begin(), grid.end(), s, std::greater<>()) -
        grid.begin());
  };

  // A threshold at grid index l admits every score of rank <= l. With the
  // upper threshold at index h, an argument whose best score has rank <= h
  // always keeps its first candidate and adds the second once l >= rank(s2);
  // any other argument gets its first candidate once l >= rank(s1).
  struct Entry {
    int64_t y1;
    bool has_second;
    size_t r2;
    int64_t y2;
  };
  std::vector<std::vector<Entry>> by_first_rank(slots);
  std::vector<int64_t> add_tp(slots, 0), add_pred(slots, 0);
  for (const ArgumentCandidates& candidates : data) {
    if (candidates.empty()) continue;
    const TopTwo t = TopTwoOf(candidates);
    const size_t r1 = rank(t.s1);
    by_first_rank[r1].push_back({t.y1 ? 1 : 0, t.has_second,
                                 t.has_second ? rank(t.s2) : 0,
                                 t.y2 ? 1 : 0});
    add_tp[r1] += t.y1 ? 1 : 0;
    add_pred[r1] += 1;
  }

  size_t best_h = 0, best_l = 0;
  int64_t best_tp = 0, best_den = positives;  // nothing predicted
  int64_t base_tp = 0, base_pred = 0;
  int64_t prefix_tp = 0, prefix_pred = 0;
  for (size_t h = 0; h < slots; ++h) {
    for (const Entry& e : by_first_rank[h]) {
      add_tp[h] -= e.y1;
      add_pred[h] -= 1;
      base_tp += e.y1;
      base_pred += 1;
      if (e.has_second) {
        add_tp[e.r2] += e.y2;
        add_pred[e.r2] += 1;
      }
    }
    int64_t run_tp = prefix_tp, run_pred = prefix_pred;
    for (size_t l = h; l < slots; ++l) {
      run_tp += add_tp[l];
      run_pred += add_pred[l];
      const int64_t tp = base_tp + run_tp;
      const int64_t den = base_pred + run_pred + positives;
      if (RatioGreater(tp, den, best_tp, best_den)) {
        best_tp = tp;
        best_den = den;
        best_h = h;
        best_l = l;
      }
    }
    prefix_tp += add_tp[h];
    prefix_pred += add_pred[h];
  }
  DualThresholdFit fit;
  fit.theta_high = grid[best_h];
  fit.theta_low = grid[best_l];
  fit.f1 = 2.0 * static_cast<double>(best_tp) / static_cast<double>(best_den);
  return fit;
}

std::vector<std::string> TuningTopics(const Fold& fold, MethodKind method) {
  std::vector<std::string> topics = fold.dev_topics;
  if (method == MethodKind::kUnsupervised) {
    topics.insert(topics.end(), fold.train_topics.begin(),
                  fold.train_topics.end());
  }
  std::sort(topics.begin(), topics.end());
  return topics;
}

std::vector<ArgumentCandidates> CollectTuningData(
    const ScoreTable& scores, const Dataset& dataset,
    std::span<const std::string> topics) {
  std::vector<ArgumentCandidates> out;
  for (size_t i = 0; i < dataset.arguments().size(); ++i) {
    if (!InScope(topics, dataset.arguments()[i].topic)) continue;
    ArgumentCandidates candidates;
    for (const LabeledPair& p : dataset.PairsOf(i)) {
      auto score = scores.Get(p.argument_id, p.key_point_id);
      if (!score) {
        throw ValidationError("no score for pair (" + p.argument_id + ", " +
                              p.key_point_id + ")");
      }
      candidates.push_back({p.key_point_id, *score, p.label == Label::kMatch});
    }
    if (!candidates.empty()) out.push_back(std::move(candidates));
  }
  return out;
}

PolicyConfig LearnPolicy(PolicyKind kind,
                         std::span<const ArgumentCandidates> tuning) {
  switch (kind) {
    case PolicyKind::kThreshold: {
      std::vector<ScoredLabel> flat;
      for (const auto& candidates : tuning) {
        for (const ScoredCandidate& c : candidates) {
          flat.push_back({c.score, c.positive});
        }
      }
      return PolicyConfig::Threshold(LearnThreshold(flat).theta);
    }
    case PolicyKind::kBestMatch:
      return PolicyConfig::BestMatch();
    case PolicyKind::kBMThreshold:
      return PolicyConfig::BMThreshold(LearnBestMatchThreshold(tuning).theta);
    case PolicyKind::kDualThreshold: {
      const DualThresholdFit fit = LearnDualThresholds(tuning);
      return PolicyConfig::DualThreshold(fit.theta_low, fit.theta_high);
    }
  }
  return PolicyConfig::BestMatch();
}

}  // namespace kpm
