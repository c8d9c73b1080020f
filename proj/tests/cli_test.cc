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

#include "kpm/cli.h"

#include <filesystem>
#include <sstream>

#include "gtest/gtest.h"
#include "json.hpp"
#include "kpm/annotation.h"
#include "kpm/corpus.h"
#include "kpm/csv.h"
#include "kpm/scoring.h"
#include "oracles.h"

namespace kpm {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("kpm_cli_" + std::string(::testing::UnitTest::GetInstance()
                                         ->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int Run(std::vector<std::string> args) {
    args.insert(args.begin(), "kpm");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return RunCli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }
  std::string P(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, HelpAndBadFlags) {
  EXPECT_EQ(Run({"--help"}), 0);
  EXPECT_EQ(Run({}), 1);
  EXPECT_EQ(Run({"evaluate", "--bogus"}), 1);
  EXPECT_EQ(Run({"frobnicate"}), 1);
}

TEST_F(CliTest, MissingInputIsIoError) {
  const std::string missing = P("nope.csv");
  EXPECT_EQ(Run({"evaluate", "--dataset", missing, "--output-dir", P("out")}), 2);
  EXPECT_NE(err_.str().find(missing), std::string::npos) << err_.str();
  EXPECT_EQ(Run({"build-dataset", "--judgments", missing, "--arguments", missing,
                 "--key-points", missing, "--output", P("d.csv")}),
            2);
  EXPECT_NE(err_.str().find(missing), std::string::npos);
}

TEST_F(CliTest, EvaluateWritesReportManifestAndIsByteIdentical) {
  WriteDataset(oracle::SyntheticCorpus(3), P("d.csv"));
  ASSERT_EQ(Run({"evaluate", "--dataset", P("d.csv"), "--scorer", "tfidf", "--policy",
                 "threshold", "--seed", "4", "--output-dir", P("a")}),
            0)
      << err_.str();
  const std::vector<std::string> files = {"report.txt", "report.json", "manifest.json",
                                          "curve_threshold_fold0.csv",
                                          "curve_threshold_fold3.csv"};
  std::vector<std::string> first;
  for (const auto& f : files) {
    ASSERT_TRUE(fs::exists(P("a/" + f))) << f;
    first.push_back(ReadFile(P("a/" + f)));
  }
  ASSERT_EQ(Run({"evaluate", "--dataset", P("d.csv"), "--scorer", "tfidf", "--policy",
                 "threshold", "--seed", "4", "--output-dir", P("a")}),
            0);
  for (size_t i = 0; i < files.size(); ++i) {
    EXPECT_EQ(ReadFile(P("a/" + files[i])), first[i]) << files[i];
  }
  const auto manifest = nlohmann::json::parse(ReadFile(P("a/manifest.json")));
  EXPECT_EQ(manifest["seed"], 4);
  EXPECT_EQ(manifest["scorer"]["flag"], "tfidf");
  EXPECT_EQ(manifest["runs"][0]["folds"].size(), 4u);
  EXPECT_EQ(manifest["runs"][0]["folds"][0]["config"]["kind"], "threshold");
  EXPECT_EQ(manifest["column_map"]["label"], "label");
}

TEST_F(CliTest, ManifestReplaysTheRun) {
  WriteDataset(oracle::SyntheticCorpus(3), P("d.csv"));
  ASSERT_EQ(Run({"evaluate", "--dataset", P("d.csv"), "--scorer", "random",
                 "--seed", "8", "--output-dir", P("a")}),
            0);
  const auto manifest = nlohmann::json::parse(ReadFile(P("a/manifest.json")));
  std::vector<std::string> args = manifest["argv"];
  for (auto& a : args) {
    if (a == P("a")) a = P("replay");
  }
  ASSERT_EQ(Run(args), 0);
  EXPECT_EQ(ReadFile(P("a/report.json")), ReadFile(P("replay/report.json")));
}

TEST_F(CliTest, MajorityAndBadScorer) {
  WriteDataset(oracle::SyntheticCorpus(3), P("d.csv"));
  ASSERT_EQ(Run({"evaluate", "--dataset", P("d.csv"), "--scorer", "majority",
                 "--output-dir", P("m")}),
            0);
  const auto report = nlohmann::json::parse(ReadFile(P("m/report.json")));
  EXPECT_EQ(report["averaged"]["recall"], 0.0);
  EXPECT_EQ(Run({"evaluate", "--dataset", P("d.csv"), "--scorer", "magic",
                 "--output-dir", P("x")}),
            1);
  EXPECT_EQ(Run({"evaluate", "--dataset", P("d.csv"), "--policy", "nope",
                 "--output-dir", P("x")}),
            1);
}

TEST_F(CliTest, ExternalGoldBestMatchIsPerfect) {
  // Every argument has exactly one gold match.
  oracle::CorpusShape shape;
  Dataset d = oracle::SyntheticCorpus(12, shape);
  std::vector<LabeledPair> pairs;
  for (size_t i = 0; i < d.arguments().size(); ++i) {
    bool first = true;
    for (const auto& p : d.PairsOf(i)) {
      pairs.push_back({p.argument_id, p.key_point_id,
                       first ? Label::kMatch : Label::kNoMatch});
      first = false;
    }
  }
  d = Dataset::Build(d.arguments(), d.key_points(), pairs);
  WriteDataset(d, P("d.csv"));
  WriteScores(oracle::GoldScores(d, 0.0, 1), P("gold.csv"));
  ASSERT_EQ(Run({"evaluate", "--dataset", P("d.csv"), "--scorer",
                 "external=" + P("gold.csv"), "--policy", "best-match",
                 "--output-dir", P("o")}),
            0)
      << err_.str();
  const auto report = nlohmann::json::parse(ReadFile(P("o/report.json")));
  EXPECT_EQ(report["averaged"]["f1"], 1.0);
}

TEST_F(CliTest, ExternalScoreFileErrors) {
  const Dataset d = oracle::SyntheticCorpus(3);
  WriteDataset(d, P("d.csv"));
  ScoreTable partial;
  for (const auto& p : d.pairs()) {
    if (&p != &d.pairs().front()) partial.Set(p.argument_id, p.key_point_id, 0.5);
  }
  WriteScores(partial, P("s.csv"));
  EXPECT_EQ(Run({"evaluate", "--dataset", P("d.csv"), "--scorer", "external=" + P("s.csv"),
                 "--output-dir", P("o")}),
            1);
  EXPECT_NE(err_.str().find("missing score"), std::string::npos);
}

TEST_F(CliTest, CurvesWritesFourFiles) {
  WriteDataset(oracle::SyntheticCorpus(3), P("d.csv"));
  ASSERT_EQ(Run({"curves", "--dataset", P("d.csv"), "--output-dir", P("c"), "--fold", "2"}),
            0)
      << err_.str();
  for (const char* name : {"threshold", "best-match", "bm-threshold", "dual-threshold"}) {
    EXPECT_TRUE(fs::exists(P(std::string("c/curve_") + name + ".csv"))) << name;
  }
  EXPECT_TRUE(fs::exists(P("c/summary.json")));
  EXPECT_TRUE(fs::exists(P("c/manifest.json")));
  const CsvTable t = ReadCsvFile(P("c/curve_threshold.csv"));
  EXPECT_EQ(t.rows.front().fields[2], "1");
  const CsvTable bm = ReadCsvFile(P("c/curve_best-match.csv"));
  const CsvTable bmt = ReadCsvFile(P("c/curve_bm-threshold.csv"));
  EXPECT_EQ(bm.rows.size(), 1u);
  EXPECT_EQ(bm.rows[0].fields, bmt.rows[0].fields);
  EXPECT_EQ(Run({"curves", "--dataset", P("d.csv"), "--output-dir", P("c"), "--fold", "4"}),
            1);
  EXPECT_EQ(Run({"curves", "--dataset", P("d.csv"), "--scorer", "majority",
                 "--output-dir", P("c")}),
            1);
}

TEST_F(CliTest, Coverage) {
  WriteDataset(oracle::SyntheticCorpus(3, {1, 3, 10}), P("d.csv"));
  ASSERT_EQ(Run({"coverage", "--dataset", P("d.csv"), "--output", P("cov.csv")}), 0);
  const CsvTable t = ReadCsvFile(P("cov.csv"));
  EXPECT_EQ(t.header, (std::vector<std::string>{"k", "mean_coverage"}));
  EXPECT_EQ(t.rows.size(), 3u);
  WriteFile(P("empty.csv"), "arg_id,key_point_id,argument,key_point,topic,stance,label\n");
  EXPECT_EQ(Run({"coverage", "--dataset", P("empty.csv"), "--output", P("x.csv")}), 1);
}

TEST_F(CliTest, CoverageDisjointFixtureExactValues) {
  // One topic: k1 matches 6 arguments, k2 3 and k3 1, out of 10.
  std::string csv = "arg_id,key_point_id,argument,key_point,topic,stance,label\n";
  for (int i = 0; i < 10; ++i) {
    const int owner = i < 6 ? 1 : (i < 9 ? 2 : 3);
    for (int k = 1; k <= 3; ++k) {
      csv += "a" + std::to_string(i) + ",k" + std::to_string(k) + ",arg " +
             std::to_string(i) + ",kp " + std::to_string(k) + ",T,pro," +
             (k == owner ? "1" : "0") + "\n";
    }
  }
  WriteFile(P("d.csv"), csv);
  ASSERT_EQ(Run({"coverage", "--dataset", P("d.csv"), "--output", P("cov.csv")}), 0);
  EXPECT_EQ(ReadFile(P("cov.csv")), "k,mean_coverage\n1,0.6\n2,0.9\n3,1\n");
}

TEST_F(CliTest, ColumnFlags) {
  WriteFile(P("d.csv"),
            "Topic,Arg,KP,Stance,Gold\nT,first arg,kp one,1,1\nT,first arg,kp two,1,0\n"
            "T,second arg,kp one,1,0\nT,second arg,kp two,1,1\n");
  EXPECT_EQ(Run({"stats", "--dataset", P("d.csv")}), 1);
  ASSERT_EQ(Run({"stats", "--dataset", P("d.csv"), "--col-arg-id", "Arg", "--col-argument",
                 "Arg", "--col-key-point-id", "KP", "--col-key-point", "KP", "--col-topic",
                 "Topic", "--col-stance", "Stance", "--col-label", "Gold"}),
            0)
      << err_.str();
  EXPECT_NE(out_.str().find("pairs:                4"), std::string::npos) << out_.str();
}

TEST_F(CliTest, BuildDatasetMatchesOracle) {
  std::mt19937_64 rng(77);
  const auto f = oracle::RandomAnnotationFixture(rng);
  {
    std::ostringstream j;
    WriteCsvRow(j, {"annotator_id", "argument_id", "selected", "stance_answer"});
    for (const RawJudgment& r : f.judgments) {
      std::string sel;
      if (r.selected_none) sel = "NONE";
      for (const auto& k : r.selected_key_point_ids) sel += (sel.empty() ? "" : "|") + k;
      WriteCsvRow(j, {r.annotator_id, r.argument_id, sel,
                      std::string(StanceName(r.stance_answer))});
    }
    WriteFile(P("judgments.csv"), j.str());
    std::ostringstream a;
    WriteCsvRow(a, {"argument_id", "argument", "topic", "stance"});
    for (const Argument& x : f.arguments) {
      WriteCsvRow(a, {x.id, x.text, x.topic, std::string(StanceName(x.stance))});
    }
    WriteFile(P("arguments.csv"), a.str());
    std::ostringstream k;
    WriteCsvRow(k, {"key_point_id", "key_point", "topic", "stance"});
    for (const KeyPoint& x : f.key_points) {
      WriteCsvRow(k, {x.id, x.text, x.topic, std::string(StanceName(x.stance))});
    }
    WriteFile(P("key_points.csv"), k.str());
  }
  const auto& o = f.options;
  ASSERT_EQ(Run({"build-dataset", "--judgments", P("judgments.csv"), "--gold-stance",
                 P("arguments.csv"), "--key-points", P("key_points.csv"), "--output",
                 P("out.csv"), "--min-shared", std::to_string(o.filter.min_shared),
                 "--min-partners", std::to_string(o.filter.min_partners),
                 "--min-judgments", std::to_string(o.min_judgments),
                 "--min-matches-per-kp", std::to_string(o.min_matches_per_kp)}),
            0)
      << err_.str();
  const auto want = oracle::Pipeline(f.judgments, f.arguments, f.key_points, f.options);
  if (want.pairs.empty()) {
    EXPECT_TRUE(LoadDataset(P("out.csv")).pairs().empty());
  } else {
    EXPECT_EQ(LoadDataset(P("out.csv")).pairs(), want.pairs);
  }
  const auto stats = nlohmann::json::parse(ReadFile(P("out.csv.stats.json")));
  EXPECT_TRUE(stats.contains("fleiss_kappa"));
  EXPECT_EQ(stats["categories"].size(), 4u);
  EXPECT_EQ(stats["annotators"].size(), 12u);
}

TEST_F(CliTest, Assemble) {
  WriteFile(P("arguments.csv"), "arg_id,argument,topic,stance\na1,Arg one,T,1\na2,Arg two,T,1\n");
  WriteFile(P("key_points.csv"), "key_point_id,key_point,topic,stance\nk1,KP,T,1\n");
  WriteFile(P("labels.csv"), "arg_id,key_point_id,label\na1,k1,1\na2,k1,0\n");
  ASSERT_EQ(Run({"assemble", "--arguments", P("arguments.csv"), "--key-points",
                 P("key_points.csv"), "--labels", P("labels.csv"), "--output", P("d.csv")}),
            0)
      << err_.str();
  const Dataset d = LoadDataset(P("d.csv"));
  EXPECT_EQ(d.pairs().size(), 2u);
  WriteFile(P("labels.csv"), "arg_id,key_point_id,label\na1,k1,yes\n");
  EXPECT_EQ(Run({"assemble", "--arguments", P("arguments.csv"), "--key-points",
                 P("key_points.csv"), "--labels", P("labels.csv"), "--output", P("d.csv")}),
            1);
}

TEST_F(CliTest, ScoreTfIdfRoundTrips) {
  const Dataset d = oracle::SyntheticCorpus(3, {2, 3, 4});
  WriteDataset(d, P("d.csv"));
  ASSERT_EQ(Run({"score-tfidf", "--dataset", P("d.csv"), "--output", P("s.csv")}), 0);
  EXPECT_EQ(LoadScores(P("s.csv"), d).size(), d.pairs().size());
}

}  // namespace
}  // namespace kpm
