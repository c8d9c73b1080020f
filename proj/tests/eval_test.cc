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

#include "gtest/gtest.h"
#include "kpm/errors.h"
#include "oracles.h"

namespace kpm {
namespace {

std::vector<std::string> Topics(int n) {
  std::vector<std::string> t;
  for (int i = 0; i < n; ++i) t.push_back(oracle::Id("topic", i));
  return t;
}

// One topic, one stance; pairs given as (argument, key point, label).
Dataset Flat(const std::vector<std::tuple<std::string, std::string, int>>& rows) {
  std::set<std::string> args, kps;
  std::vector<LabeledPair> pairs;
  for (const auto& [a, k, y] : rows) {
    args.insert(a);
    kps.insert(k);
    pairs.push_back({a, k, y ? Label::kMatch : Label::kNoMatch});
  }
  std::vector<Argument> arguments;
  for (const auto& a : args) arguments.push_back({a, "text " + a, "T", Stance::kPro, {}});
  std::vector<KeyPoint> key_points;
  for (const auto& k : kps) key_points.push_back({k, "kp " + k, "T", Stance::kPro});
  return Dataset::Build(arguments, key_points, pairs);
}

TEST(FoldsTest, StandardSplitSizes) {
  const auto topics = Topics(28);
  const auto folds = MakeFolds(topics, 17);
  ASSERT_EQ(folds.size(), 4u);
  std::multiset<std::string> tests;
  for (const Fold& f : folds) {
    EXPECT_EQ(f.test_topics.size(), 7u);
    EXPECT_EQ(f.train_topics.size(), 17u);
    EXPECT_EQ(f.dev_topics.size(), 4u);
    std::set<std::string> all(f.test_topics.begin(), f.test_topics.end());
    all.insert(f.train_topics.begin(), f.train_topics.end());
    all.insert(f.dev_topics.begin(), f.dev_topics.end());
    EXPECT_EQ(all.size(), 28u);
    tests.insert(f.test_topics.begin(), f.test_topics.end());
    EXPECT_EQ(TuningTopics(f, MethodKind::kUnsupervised).size(), 21u);
  }
  EXPECT_EQ(tests.size(), 28u);
  EXPECT_EQ(std::set<std::string>(tests.begin(), tests.end()).size(), 28u);
}

TEST(FoldsTest, DeterministicAndSeeded) {
  const auto topics = Topics(28);
  const auto a = MakeFolds(topics, 5), b = MakeFolds(topics, 5), c = MakeFolds(topics, 6);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(a[i].test_topics, b[i].test_topics);
    EXPECT_EQ(a[i].dev_topics, b[i].dev_topics);
  }
  bool differs = false;
  for (int i = 0; i < 4; ++i) differs |= a[i].test_topics != c[i].test_topics;
  EXPECT_TRUE(differs);
}

TEST(FoldsTest, Errors) {
  EXPECT_THROW(MakeFolds(Topics(27), 1), ValidationError);
  EXPECT_THROW(MakeFolds(Topics(8), 1, /*strict=*/true), ValidationError);
  EXPECT_THROW(MakeFolds(Topics(10), 1, false), ValidationError);
  const auto loose = MakeFolds(Topics(8), 1, false);
  EXPECT_EQ(loose[0].test_topics.size(), 2u);
  EXPECT_FALSE(loose[0].dev_topics.empty());
  auto dup = Topics(28);
  dup[1] = dup[0];
  EXPECT_THROW(MakeFolds(dup, 1), ValidationError);
}

TEST(MetricsTest, FromCounts) {
  const Metrics m = Metrics::FromCounts(1, 1, 1, 1);
  EXPECT_EQ(m.precision, 0.5);
  EXPECT_EQ(m.recall, 0.5);
  EXPECT_EQ(m.f1, 0.5);
  EXPECT_EQ(m.accuracy, 0.5);
  const Metrics nothing = Metrics::FromCounts(0, 0, 3, 7);
  EXPECT_FALSE(nothing.precision.has_value());
  EXPECT_EQ(nothing.recall, 0.0);
  EXPECT_FALSE(nothing.f1.has_value());
  EXPECT_EQ(nothing.accuracy, 0.7);
  const Metrics zero = Metrics::FromCounts(0, 2, 3, 0);
  EXPECT_EQ(zero.f1, 0.0);
  EXPECT_FALSE(Metrics::FromCounts(0, 0, 0, 0).accuracy.has_value());
}

TEST(PairMetricsTest, HandCountAndGold) {
  const Dataset d = Flat({{"a1", "k1", 1}, {"a1", "k2", 0}, {"a2", "k1", 1}, {"a2", "k2", 0}});
  PredictionMap pred = {{"a1", {"a1", {"k1", "k2"}}}, {"a2", {"a2", {}}}};
  const Metrics m = PairMetrics(pred, d);
  EXPECT_EQ(m.tp, 1);
  EXPECT_EQ(m.fp, 1);
  EXPECT_EQ(m.fn, 1);
  EXPECT_EQ(m.tn, 1);
  EXPECT_EQ(m.f1, 0.5);
  PredictionMap gold = {{"a1", {"a1", {"k1"}}}, {"a2", {"a2", {"k1"}}}};
  const Metrics g = PairMetrics(gold, d);
  EXPECT_EQ(g.precision, 1.0);
  EXPECT_EQ(g.recall, 1.0);
  EXPECT_EQ(g.f1, 1.0);
  EXPECT_EQ(g.accuracy, 1.0);
  PredictionMap missing = {{"a1", {"a1", {}}}};
  EXPECT_THROW(PairMetrics(missing, d), ValidationError);
}

TEST(CategoryMetricsTest, BruteRecount) {
  const Dataset d = Flat({{"none", "k1", 0}, {"none", "k2", 0}, {"none", "k3", 0},
                          {"one", "k1", 1}, {"one", "k2", 0}, {"one", "k3", 0},
                          {"two", "k1", 1}, {"two", "k2", 1}, {"two", "k3", 0}});
  PredictionMap pred = {{"none", {"none", {}}},
                        {"one", {"one", {"k1"}}},
                        {"two", {"two", {"k1", "k3"}}}};
  const CategoryMetrics c = ComputeCategoryMetrics(pred, d);
  EXPECT_EQ(c.no_key_point.accuracy, 1.0);
  EXPECT_EQ(c.no_key_point.tn, 3);
  EXPECT_EQ(c.single.tp, 1);
  EXPECT_EQ(c.single.fp, 0);
  EXPECT_EQ(c.single.fn, 0);
  EXPECT_EQ(c.single.tn, 2);
  EXPECT_EQ(c.multiple.tp, 1);
  EXPECT_EQ(c.multiple.fp, 1);
  EXPECT_EQ(c.multiple.fn, 1);
  EXPECT_EQ(c.multiple.tn, 0);
  const Metrics all = PairMetrics(pred, d);
  EXPECT_EQ(all.tp, c.no_key_point.tp + c.single.tp + c.multiple.tp);
  EXPECT_EQ(all.total(), 9);
}

TEST(CurveTest, ThresholdEndpointsAndHarmonicMean) {
  const Dataset d = oracle::SyntheticCorpus(4, {4, 3, 6});
  const ScoreTable s = ScoreDatasetTfIdf(d, d.topics());
  const std::vector<std::string> scope = {d.topics()[1], d.topics()[3]};
  const auto grid = DefaultGrid(s, d, scope);
  EXPECT_EQ(grid.front(), kNoGate);
  EXPECT_EQ(grid.back(), kMatchNothing);
  const Curve c = PrCurve(PolicyKind::kThreshold, PolicyConfig::Threshold(0.3), s, d,
                          scope, grid);
  ASSERT_EQ(c.points.size(), grid.size());
  EXPECT_EQ(c.points.front().metrics.recall, 1.0);
  EXPECT_EQ(c.points.back().metrics.recall, 0.0);
  EXPECT_FALSE(c.points.back().metrics.precision.has_value());
  for (size_t i = 1; i < c.points.size(); ++i) {
    EXPECT_LE(*c.points[i].metrics.recall, *c.points[i - 1].metrics.recall);
  }
  for (const auto& p : c.points) {
    const auto& m = p.metrics;
    if (!m.f1) continue;
    const double want = *m.precision + *m.recall == 0
                            ? 0.0
                            : 2 * *m.precision * *m.recall / (*m.precision + *m.recall);
    EXPECT_NEAR(*m.f1, want, 1e-9);
  }
  // Each point agrees with predicting through the policy directly.
  for (size_t i = 0; i < c.points.size(); i += 7) {
    const auto pred = PredictAll(PolicyConfig::Threshold(c.points[i].threshold), s, d, scope);
    EXPECT_EQ(PairMetrics(pred, d, scope), c.points[i].metrics);
  }
  EXPECT_EQ(c.chosen.metrics,
            PairMetrics(PredictAll(PolicyConfig::Threshold(0.3), s, d, scope), d, scope));
}

TEST(CurveTest, BestMatchPointIsBmThresholdNoGate) {
  const Dataset d = oracle::SyntheticCorpus(8, {4, 3, 6});
  const ScoreTable s = ScoreDatasetTfIdf(d, d.topics());
  const auto grid = DefaultGrid(s, d, {});
  const Curve bm = PrCurve(PolicyKind::kBestMatch, PolicyConfig::BestMatch(), s, d, {}, grid);
  const Curve bmt = PrCurve(PolicyKind::kBMThreshold, PolicyConfig::BMThreshold(0.5), s, d,
                            {}, grid);
  ASSERT_EQ(bm.points.size(), 1u);
  EXPECT_EQ(bmt.points.front().threshold, kNoGate);
  EXPECT_EQ(bmt.points.front().metrics, bm.points[0].metrics);

  const Curve dual = PrCurve(PolicyKind::kDualThreshold,
                             PolicyConfig::DualThreshold(0.2, 0.6), s, d, {}, grid);
  for (const auto& p : dual.points) {
    const PolicyConfig cfg = PolicyConfig::DualThreshold(p.threshold, std::max(p.threshold, 0.6));
    EXPECT_EQ(PairMetrics(PredictAll(cfg, s, d), d), p.metrics);
  }
  EXPECT_THROW(PrCurve(PolicyKind::kThreshold, PolicyConfig::BestMatch(), s, d, {}, grid),
               ValidationError);
}

TEST(CoverageTest, DisjointAndOverlapping) {
  CoverageGroup g;
  g.argument_count = 10;
  for (int i = 0; i < 6; ++i) g.matches["k1"].insert(oracle::Id("a", i));
  for (int i = 6; i < 9; ++i) g.matches["k2"].insert(oracle::Id("a", i));
  g.matches["k3"].insert("a009");
  std::vector<CoverageGroup> groups = {g};
  const auto disjoint = CoverageCurve(groups);
  ASSERT_EQ(disjoint.size(), 3u);
  EXPECT_DOUBLE_EQ(disjoint[0], 0.6);
  EXPECT_DOUBLE_EQ(disjoint[1], 0.9);
  EXPECT_DOUBLE_EQ(disjoint[2], 1.0);

  CoverageGroup o;
  o.argument_count = 10;
  for (int i = 0; i < 6; ++i) o.matches["k1"].insert(oracle::Id("a", i));
  o.matches["k2"] = {"a004", "a005", "a006"};
  groups = {o};
  const auto overlap = CoverageCurve(groups);
  EXPECT_DOUBLE_EQ(overlap[0], 0.6);
  EXPECT_DOUBLE_EQ(overlap[1], 0.7);

  CoverageGroup empty;
  empty.argument_count = 5;
  empty.matches["k1"];
  empty.matches["k2"];
  groups = {empty};
  for (double v : CoverageCurve(groups)) EXPECT_EQ(v, 0.0);
}

TEST(CoverageTest, FromDatasetNondecreasingAndBounded) {
  const Dataset d = oracle::SyntheticCorpus(6, {6, 5, 20});
  const auto groups = CoverageGroupsOf(d);
  EXPECT_EQ(groups.size(), 12u);
  const auto curve = CoverageCurve(groups);
  ASSERT_EQ(curve.size(), 5u);
  for (size_t k = 1; k < curve.size(); ++k) EXPECT_GE(curve[k], curve[k - 1]);
  EXPECT_LE(curve.back(), 1.0);
}

TEST(AverageTest, SkipsUndefinedFolds) {
  const std::vector<Metrics> folds = {Metrics::FromCounts(1, 1, 0, 2),
                                      Metrics::FromCounts(0, 0, 2, 2)};
  const Averages a = AverageMetrics(folds);
  EXPECT_EQ(a.precision, 0.5);                 // second fold undefined
  EXPECT_DOUBLE_EQ(*a.recall, 0.5);            // (1 + 0) / 2
  EXPECT_DOUBLE_EQ(*a.accuracy, (0.75 + 0.5) / 2);
}

class ExperimentTest : public ::testing::Test {
 protected:
  Dataset d_ = oracle::SyntheticCorpus(10);
};

TEST_F(ExperimentTest, MajorityAccuracyIsOneMinusPositiveRate) {
  const EvalReport r = RunExperiment(d_, ScorerSpec::Majority(), PolicyKind::kThreshold, 3);
  ASSERT_EQ(r.folds.size(), 4u);
  int64_t total = 0;
  double mean = 0;
  for (const FoldResult& f : r.folds) {
    total += f.metrics.total();
    EXPECT_EQ(f.metrics.recall, 0.0);
    const double rate =
        static_cast<double>(f.metrics.fn) / static_cast<double>(f.metrics.total());
    EXPECT_DOUBLE_EQ(*f.metrics.accuracy, 1.0 - rate);
    mean += *f.metrics.accuracy / 4;
  }
  EXPECT_EQ(total, static_cast<int64_t>(d_.pairs().size()));
  EXPECT_DOUBLE_EQ(*r.averaged.accuracy, mean);
  EXPECT_EQ(r.averaged.recall, 0.0);
}

TEST_F(ExperimentTest, RandomBaselineExpectation) {
  const EvalReport r = RunExperiment(d_, ScorerSpec::Random(), PolicyKind::kThreshold, 3);
  ASSERT_TRUE(r.expected.has_value());
  for (const FoldResult& f : r.folds) {
    ASSERT_TRUE(f.expected && f.random_rate);
    const double test_rate = static_cast<double>(f.metrics.tp + f.metrics.fn) /
                             static_cast<double>(f.metrics.total());
    EXPECT_NEAR(*f.expected->precision, test_rate, 1e-12);
    EXPECT_EQ(*f.expected->recall, *f.random_rate);
  }
  EXPECT_NEAR(*r.averaged.recall, *r.expected->recall, 0.08);
  const EvalReport again = RunExperiment(d_, ScorerSpec::Random(), PolicyKind::kThreshold, 3);
  EXPECT_EQ(again.averaged, r.averaged);
}

TEST_F(ExperimentTest, GoldScoresGivePerfectThreshold) {
  const ScorerSpec gold =
      ScorerSpec::External(oracle::GoldScores(d_, 0.0, 1), MethodKind::kSupervised);
  const EvalReport r = RunExperiment(d_, gold, PolicyKind::kThreshold, 9);
  EXPECT_EQ(r.averaged.f1, 1.0);
  for (const FoldResult& f : r.folds) ASSERT_TRUE(f.config.has_value());
}

TEST_F(ExperimentTest, TfIdfIsReproducibleAndBeatsChance) {
  const EvalReport a = RunExperiment(d_, ScorerSpec::TfIdf(), PolicyKind::kThreshold, 2);
  const EvalReport b = RunExperiment(d_, ScorerSpec::TfIdf(), PolicyKind::kThreshold, 2);
  EXPECT_EQ(a.averaged, b.averaged);
  for (size_t i = 0; i < a.folds.size(); ++i) EXPECT_EQ(a.folds[i].config, b.folds[i].config);
  const double rate = *ComputeDatasetStats(d_).positive_rate;
  EXPECT_GT(*a.averaged.f1, 2 * rate / (1 + rate));
}

TEST_F(ExperimentTest, ExternalCoverageErrors) {
  ScoreTable partial = oracle::GoldScores(d_, 0.0, 1);
  ScoreTable smaller;
  bool skip = true;
  for (const auto& [k, v] : partial.entries()) {
    if (skip) { skip = false; continue; }
    smaller.Set(k.first, k.second, v);
  }
  EXPECT_THROW(RunExperiment(d_, ScorerSpec::External(smaller, MethodKind::kSupervised),
                             PolicyKind::kThreshold, 1),
               ValidationError);
}

}  // namespace
}  // namespace kpm
