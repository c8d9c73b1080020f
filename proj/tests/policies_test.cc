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

#include <random>

#include "gtest/gtest.h"
#include "kpm/errors.h"
#include "oracles.h"

namespace kpm {
namespace {

using oracle::kInf;

std::vector<Candidate> C(std::initializer_list<std::pair<const char*, double>> xs) {
  std::vector<Candidate> out;
  for (const auto& [k, s] : xs) out.push_back({k, s});
  return out;
}

using Ids = std::set<std::string>;

TEST(PolicyConfigTest, Validation) {
  EXPECT_NO_THROW(PolicyConfig::Threshold(0.5).Validate());
  EXPECT_NO_THROW(PolicyConfig::BestMatch().Validate());
  EXPECT_NO_THROW(PolicyConfig::DualThreshold(0.2, 0.2).Validate());
  EXPECT_THROW(PolicyConfig::DualThreshold(0.5, 0.2).Validate(), ValidationError);
  PolicyConfig missing;
  missing.kind = PolicyKind::kBMThreshold;
  EXPECT_THROW(missing.Validate(), ValidationError);
  PolicyConfig nan = PolicyConfig::Threshold(std::nan(""));
  EXPECT_THROW(nan.Validate(), ValidationError);
}

TEST(PolicyConfigTest, Names) {
  for (PolicyKind k : kAllPolicies) EXPECT_EQ(ParsePolicyKind(PolicyName(k)), k);
  EXPECT_THROW(ParsePolicyKind("bogus"), ValidationError);
}

TEST(SelectTest, Examples) {
  EXPECT_EQ(SelectMatches(PolicyConfig::BestMatch(),
                          C({{"k1", 0.3}, {"k2", 0.5}, {"k3", 0.2}})),
            Ids{"k2"});
  EXPECT_EQ(SelectMatches(PolicyConfig::BMThreshold(0.6), C({{"k1", 0.3}, {"k2", 0.5}})),
            Ids{});
  EXPECT_EQ(SelectMatches(PolicyConfig::BMThreshold(0.4), C({{"k1", 0.3}, {"k2", 0.5}})),
            Ids{"k2"});
  const PolicyConfig dual = PolicyConfig::DualThreshold(0.5, 0.8);
  EXPECT_EQ(SelectMatches(dual, C({{"k1", 0.9}, {"k2", 0.55}, {"k3", 0.3}})),
            (Ids{"k1", "k2"}));
  EXPECT_EQ(SelectMatches(dual, C({{"k1", 0.7}, {"k2", 0.6}})), Ids{"k1"});
  EXPECT_EQ(SelectMatches(dual, C({{"k1", 0.4}, {"k2", 0.3}})), Ids{});
  EXPECT_EQ(SelectMatches(dual, C({{"k1", 0.9}})), Ids{"k1"});
  EXPECT_EQ(SelectMatches(PolicyConfig::Threshold(0.5),
                          C({{"k1", 0.5}, {"k2", 0.49}, {"k3", 0.7}})),
            (Ids{"k1", "k3"}));
  EXPECT_THROW(SelectMatches(PolicyConfig::BestMatch(), {}), ValidationError);
}

TEST(SelectTest, TiesGoToSmallestId) {
  EXPECT_EQ(SelectMatches(PolicyConfig::BestMatch(), C({{"k2", 0.5}, {"k1", 0.5}})),
            Ids{"k1"});
  EXPECT_EQ(SelectMatches(PolicyConfig::DualThreshold(0.1, 0.9),
                          C({{"k3", 0.5}, {"k2", 0.5}, {"k1", 0.4}})),
            Ids{"k2"});
}

TEST(SelectTest, DualMatchesCaseEnumeration) {
  // Exhaustive over a small grid of (s1, s2, lo, hi).
  const double v[] = {0.1, 0.3, 0.5, 0.7, 0.9};
  for (double s1 : v) for (double s2 : v) for (double lo : v) for (double hi : v) {
    if (lo > hi) continue;
    const Ids got = SelectMatches(PolicyConfig::DualThreshold(lo, hi),
                                  C({{"a", s1}, {"b", s2}}));
    const std::string top = s1 >= s2 ? "a" : "b";
    const double hi_s = std::max(s1, s2), lo_s = std::min(s1, s2);
    Ids want;
    if (lo_s >= lo && hi_s >= hi) {
      want = {"a", "b"};
    } else if (hi_s >= lo) {
      want = {top};
    }
    EXPECT_EQ(got, want) << s1 << " " << s2 << " " << lo << " " << hi;
  }
}

TEST(SelectTest, RandomizedInvariants) {
  std::mt19937_64 rng(31);
  for (int iter = 0; iter < 2000; ++iter) {
    const int n = oracle::UniformInt(rng, 1, 8);
    std::vector<Candidate> c;
    for (int i = 0; i < n; ++i) {
      c.push_back({oracle::Id("k", i), std::round(oracle::Uniform(rng, -1, 2) * 8) / 8});
    }
    const double t1 = oracle::Uniform(rng, -1, 2), t2 = oracle::Uniform(rng, -1, 2);
    const Ids lo_set = SelectMatches(PolicyConfig::Threshold(std::min(t1, t2)), c);
    const Ids hi_set = SelectMatches(PolicyConfig::Threshold(std::max(t1, t2)), c);
    for (const auto& k : hi_set) EXPECT_TRUE(lo_set.count(k));
    const Ids bm = SelectMatches(PolicyConfig::BestMatch(), c);
    EXPECT_EQ(bm.size(), 1u);
    const Ids bmt = SelectMatches(PolicyConfig::BMThreshold(t1), c);
    EXPECT_LE(bmt.size(), 1u);
    for (const auto& k : bmt) EXPECT_TRUE(bm.count(k));
    EXPECT_EQ(SelectMatches(PolicyConfig::BMThreshold(kNoGate), c), bm);
    EXPECT_EQ(SelectMatches(PolicyConfig::Threshold(kMatchNothing), c), Ids{});
    EXPECT_EQ(SelectMatches(PolicyConfig::Threshold(kNoGate), c).size(), c.size());
    const Ids dual = SelectMatches(
        PolicyConfig::DualThreshold(std::min(t1, t2), std::max(t1, t2)), c);
    EXPECT_LE(dual.size(), 2u);
  }
}

TEST(LearnThresholdTest, Examples) {
  const std::vector<ScoredLabel> pairs = {
      {0.9, true}, {0.8, false}, {0.7, true}, {0.1, false}};
  const ThresholdFit fit = LearnThreshold(pairs);
  EXPECT_EQ(fit.theta, 0.7);
  EXPECT_NEAR(fit.f1, 0.8, 1e-12);

  const std::vector<ScoredLabel> separable = {
      {0.95, true}, {0.6, true}, {0.8, true}, {0.5, false}, {0.2, false}};
  const ThresholdFit s = LearnThreshold(separable);
  EXPECT_EQ(s.theta, 0.6);
  EXPECT_EQ(s.f1, 1.0);

  const std::vector<ScoredLabel> one = {{0.5, true}};
  EXPECT_EQ(LearnThreshold(one).theta, 0.5);
  EXPECT_EQ(LearnThreshold(one).f1, 1.0);

  const std::vector<ScoredLabel> negatives = {{0.5, false}};
  EXPECT_THROW(LearnThreshold(negatives), ValidationError);
}

TEST(LearnThresholdTest, TiesGoToLargerThreshold) {
  // theta 0.9 -> F1 2/3 (tp 1, fn 1); theta 0.5 -> tp 2, fp 2: F1 2/3.
  const std::vector<ScoredLabel> pairs = {
      {0.9, true}, {0.7, false}, {0.6, false}, {0.5, true}};
  EXPECT_EQ(LearnThreshold(pairs).theta, 0.9);
}

TEST(LearnThresholdTest, MatchesBruteForce) {
  std::mt19937_64 rng(41);
  for (int iter = 0; iter < 300; ++iter) {
    const auto data = oracle::RandomCandidates(rng, 60, iter % 2 == 0);
    std::vector<ScoredLabel> flat;
    for (const auto& c : data) for (const auto& s : c) flat.push_back({s.score, s.positive});
    const ThresholdFit got = LearnThreshold(flat);
    const auto want = oracle::BruteLearnThreshold(flat);
    EXPECT_EQ(got.theta, want.theta);
    EXPECT_EQ(got.f1, want.f1.Value());
  }
}

TEST(LearnDualTest, MatchesBruteForce) {
  std::mt19937_64 rng(42);
  for (int iter = 0; iter < 200; ++iter) {
    const auto data = oracle::RandomCandidates(rng, 40, iter % 2 == 0);
    const DualThresholdFit got = LearnDualThresholds(data);
    const auto want = oracle::BruteLearnDual(data);
    EXPECT_EQ(got.theta_low, want.lo) << iter;
    EXPECT_EQ(got.theta_high, want.hi) << iter;
    EXPECT_EQ(got.f1, want.f1.Value()) << iter;
  }
}

TEST(LearnDualTest, ThreeArgumentsWithDoubleMatch) {
  const std::vector<ArgumentCandidates> data = {
      {{"k1", 0.9, true}, {"k2", 0.6, true}, {"k3", 0.2, false}},
      {{"k1", 0.7, true}, {"k2", 0.65, false}},
      {{"k1", 0.3, false}, {"k2", 0.1, false}}};
  const DualThresholdFit got = LearnDualThresholds(data);
  const auto want = oracle::BruteLearnDual(data);
  EXPECT_EQ(got.theta_low, want.lo);
  EXPECT_EQ(got.theta_high, want.hi);
  EXPECT_DOUBLE_EQ(got.f1, 1.0);
}

TEST(LearnDualTest, SingleMatchesReduceToBestMatchThreshold) {
  std::vector<ArgumentCandidates> data;
  for (int i = 0; i < 10; ++i) {
    data.push_back({{"k1", 0.8 + 0.01 * i, true}, {"k2", 0.3, false}, {"k3", 0.1, false}});
  }
  const DualThresholdFit fit = LearnDualThresholds(data);
  EXPECT_EQ(fit.f1, 1.0);
  for (const auto& c : data) {
    std::vector<double> ranked = {c[0].score, c[1].score, c[2].score};
    EXPECT_EQ(SelectionSize(PolicyConfig::DualThreshold(fit.theta_low, fit.theta_high),
                            ranked),
              1u);
  }
}

TEST(LearnDualTest, IdenticalScoresAllPositive) {
  std::vector<ArgumentCandidates> data;
  for (int i = 0; i < 4; ++i) {
    data.push_back({{"k1", 0.5, true}, {"k2", 0.5, true}, {"k3", 0.5, true}});
  }
  const DualThresholdFit fit = LearnDualThresholds(data);
  EXPECT_EQ(fit.theta_low, 0.5);
  EXPECT_EQ(fit.theta_high, 0.5);
  // Top two of three everywhere: P = 1, R = 2/3.
  EXPECT_NEAR(fit.f1, 0.8, 1e-12);
}

TEST(LearnBestMatchTest, NonTopPositivesCountAsMisses) {
  const std::vector<ArgumentCandidates> data = {
      {{"k1", 0.9, true}, {"k2", 0.8, true}},
      {{"k1", 0.4, false}, {"k2", 0.2, false}}};
  const ThresholdFit fit = LearnBestMatchThreshold(data);
  EXPECT_EQ(fit.theta, 0.9);
  EXPECT_NEAR(fit.f1, 2.0 / 3.0, 1e-12);
}

TEST(TuningTopicsTest, BySupervision) {
  Fold f;
  f.train_topics = {"a", "b"};
  f.dev_topics = {"c", "d"};
  EXPECT_EQ(TuningTopics(f, MethodKind::kSupervised), f.dev_topics);
  EXPECT_EQ(TuningTopics(f, MethodKind::kUnsupervised),
            (std::vector<std::string>{"a", "b", "c", "d"}));
}

TEST(ApplyPolicyTest, UsesDatasetCandidates) {
  const Dataset d = oracle::SyntheticCorpus(1, {1, 3, 4});
  const ScoreTable gold = oracle::GoldScores(d, 0.0, 1);
  for (size_t i = 0; i < d.arguments().size(); ++i) {
    const std::string& id = d.arguments()[i].id;
    Ids want;
    for (const auto& p : d.PairsOf(i)) {
      if (p.label == Label::kMatch) want.insert(p.key_point_id);
    }
    EXPECT_EQ(ApplyPolicy(PolicyConfig::Threshold(0.5), gold, d, id).matched_key_point_ids,
              want);
  }
  EXPECT_EQ(PredictAll(PolicyConfig::BestMatch(), gold, d).size(), d.arguments().size());
  ScoreTable partial;
  EXPECT_THROW(ApplyPolicy(PolicyConfig::BestMatch(), partial, d, d.arguments()[0].id),
               ValidationError);
}

}  // namespace
}  // namespace kpm
