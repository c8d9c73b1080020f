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
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kpm/annotation.h"
#include "kpm/corpus.h"
#include "kpm/csv.h"
#include "kpm/errors.h"
#include "kpm/eval.h"
#include "kpm/policies.h"
#include "kpm/report.h"
#include "kpm/scoring.h"

namespace kpm {
namespace {

using nlohmann::json;

void AddColumnFlags(CLI::App* cmd, ColumnMap* c) {
  cmd->add_option("--col-arg-id", c->argument_id, "argument id column")
      ->capture_default_str();
  cmd->add_option("--col-key-point-id", c->key_point_id, "key point id column")
      ->capture_default_str();
  cmd->add_option("--col-argument", c->argument_text, "argument text column")
      ->capture_default_str();
  cmd->add_option("--col-key-point", c->key_point_text, "key point text column")
      ->capture_default_str();
  cmd->add_option("--col-topic", c->topic, "topic column")->capture_default_str();
  cmd->add_option("--col-stance", c->stance, "stance column")
      ->capture_default_str();
  cmd->add_option("--col-label", c->label, "label column")->capture_default_str();
  cmd->add_option("--col-quality", c->quality, "argument quality column");
  cmd->add_option("--col-key-point-topic", c->key_point_topic,
                  "key point topic column (default: topic)");
  cmd->add_option("--col-key-point-stance", c->key_point_stance,
                  "key point stance column (default: stance)");
}

json ToJson(const ColumnMap& c) {
  return {{"argument_id", c.argument_id},
          {"key_point_id", c.key_point_id},
          {"argument_text", c.argument_text},
          {"key_point_text", c.key_point_text},
          {"topic", c.topic},
          {"stance", c.stance},
          {"label", c.label},
          {"quality", c.quality},
          {"key_point_topic", c.key_point_topic},
          {"key_point_stance", c.key_point_stance}};
}

std::string Dump(const json& j) { return j.dump(2) + "\n"; }

void EnsureDirectory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create directory " + dir);
  }
}

std::string Join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

Dataset LoadNonEmpty(const std::string& path, const ColumnMap& columns) {
  Dataset d = LoadDataset(path, columns);
  if (d.pairs().empty()) throw ValidationError(path + ": dataset has no pairs");
  return d;
}

struct ScorerFlags {
  std::string scorer = "tfidf";
  std::string external_kind = "supervised";
};

void AddScorerFlags(CLI::App* cmd, ScorerFlags* f) {
  cmd->add_option("--scorer", f->scorer,
                  "tfidf | external=<path> | majority | random")
      ->capture_default_str();
  cmd->add_option("--external-kind", f->external_kind,
                  "tuning split for external scores")
      ->check(CLI::IsMember({"supervised", "unsupervised"}))
      ->capture_default_str();
}

ScorerSpec ResolveScorer(const ScorerFlags& f, const Dataset& dataset) {
  if (f.scorer == "tfidf") return ScorerSpec::TfIdf();
  if (f.scorer == "majority") return ScorerSpec::Majority();
  if (f.scorer == "random") return ScorerSpec::Random();
  const std::string prefix = "external=";
  if (f.scorer.rfind(prefix, 0) == 0 && f.scorer.size() > prefix.size()) {
    const MethodKind method = f.external_kind == "unsupervised"
                                  ? MethodKind::kUnsupervised
                                  : MethodKind::kSupervised;
    return ScorerSpec::External(
        LoadScores(f.scorer.substr(prefix.size()), dataset), method);
  }
  throw ValidationError("unknown scorer '" + f.scorer + "'");
}

json ScorerJson(const ScorerFlags& f, const ScorerSpec& spec) {
  json j = {{"flag", f.scorer}};
  if (spec.kind == ScorerKind::kExternal) j["external_kind"] = f.external_kind;
  return j;
}

json Manifest(const std::string& command, const std::vector<std::string>& argv) {
  return {{"tool", "kpm"}, {"version", kToolVersion}, {"command", command},
          {"argv", argv}};
}

// --- build-dataset ------------------------------------------------------------

struct BuildFlags {
  std::string judgments, arguments, key_points, output, stats;
  AnnotationOptions options;
};

void RunBuild(const BuildFlags& f, const std::vector<std::string>& argv,
              std::ostream& out) {
  const std::vector<RawJudgment> judgments = LoadJudgments(f.judgments);
  const std::vector<Argument> arguments = LoadArguments(f.arguments);
  const std::vector<KeyPoint> key_points = LoadKeyPoints(f.key_points);
  const AnnotationRun run =
      RunAnnotationPipeline(judgments, arguments, key_points, f.options);
  WriteDataset(run.dataset, f.output);

  json summary = AnnotationSummary(run);
  const FilterOptions& fo = f.options.filter;
  json manifest = Manifest("build-dataset", argv);
  manifest["inputs"] = {{"judgments", f.judgments},
                        {"arguments", f.arguments},
                        {"key_points", f.key_points}};
  manifest["output"] = f.output;
  manifest["parameters"] = {{"max_stance_error", fo.max_stance_error},
                            {"min_kappa", fo.min_kappa},
                            {"min_shared", fo.min_shared},
                            {"min_partners", fo.min_partners},
                            {"majority", f.options.majority},
                            {"min_judgments", f.options.min_judgments},
                            {"positive_min", f.options.positive_min},
                            {"negative_max", f.options.negative_max},
                            {"min_matches_per_kp", f.options.min_matches_per_kp}};
  summary["manifest"] = manifest;
  const std::string stats_path =
      f.stats.empty() ? f.output + ".stats.json" : f.stats;
  WriteFile(stats_path, Dump(summary));
  out << FormatDatasetStats(ComputeDatasetStats(run.dataset),
                            ComputeCategoryTextStats(run.dataset));
}

// --- evaluate -----------------------------------------------------------------

struct EvalFlags {
  std::string dataset, output_dir, policy = "threshold";
  uint64_t seed = 0;
  bool loose_folds = false;
  ScorerFlags scorer;
  ColumnMap columns;
};

std::vector<PolicyKind> PoliciesOf(const std::string& flag) {
  if (flag == "all") return {std::begin(kAllPolicies), std::end(kAllPolicies)};
  return {ParsePolicyKind(flag)};
}

void RunEvaluate(const EvalFlags& f, const std::vector<std::string>& argv,
                 std::ostream& out) {
  const Dataset dataset = LoadNonEmpty(f.dataset, f.columns);
  const ScorerSpec scorer = ResolveScorer(f.scorer, dataset);
  EnsureDirectory(f.output_dir);
  const bool baseline =
      scorer.kind == ScorerKind::kMajority || scorer.kind == ScorerKind::kRandom;
  std::vector<PolicyKind> policies = PoliciesOf(f.policy);
  if (baseline) policies.resize(1);
  ExperimentOptions options;
  options.strict_folds = !f.loose_folds;

  std::string table;
  json reports = json::array();
  json runs = json::array();
  for (PolicyKind policy : policies) {
    const EvalReport report = RunExperiment(dataset, scorer, policy, f.seed, options);
    table += FormatReportTable(report) + "\n";
    reports.push_back(ToJson(report));
    json folds = json::array();
    for (const FoldResult& r : report.folds) {
      json entry = {{"index", r.fold.index}};
      entry["config"] = r.config ? ToJson(*r.config) : json();
      if (r.random_rate) entry["random_rate"] = *r.random_rate;
      if (r.expected) entry["expected"] = ToJson(*r.expected);
      folds.push_back(std::move(entry));
      if (!r.config) continue;
      // Test-fold PR curve around the learned configuration.
      const FoldScoring scoring = ScoreFold(dataset, scorer, r.fold);
      const std::vector<double> grid =
          DefaultGrid(scoring.scores, dataset, r.fold.test_topics);
      const Curve curve = PrCurve(policy, *r.config, scoring.scores, dataset,
                                  r.fold.test_topics, grid);
      WriteFile(Join(f.output_dir, "curve_" + std::string(PolicyName(policy)) +
                                       "_fold" + std::to_string(r.fold.index) +
                                       ".csv"),
                FormatCurve(curve));
    }
    json run = {{"policy", baseline ? json() : json(std::string(PolicyName(policy)))},
                {"folds", std::move(folds)}};
    if (report.expected) run["expected"] = ToJson(*report.expected);
    runs.push_back(std::move(run));
  }
  WriteFile(Join(f.output_dir, "report.txt"), table);
  WriteFile(Join(f.output_dir, "report.json"),
            Dump(reports.size() == 1 ? reports[0] : reports));

  json manifest = Manifest("evaluate", argv);
  manifest["inputs"] = {{"dataset", f.dataset}};
  manifest["column_map"] = ToJson(f.columns);
  manifest["seed"] = f.seed;
  manifest["strict_folds"] = options.strict_folds;
  manifest["scorer"] = ScorerJson(f.scorer, scorer);
  manifest["runs"] = std::move(runs);
  WriteFile(Join(f.output_dir, "manifest.json"), Dump(manifest));
  out << table;
}

// --- curves -------------------------------------------------------------------

struct CurveFlags {
  std::string dataset, output_dir;
  uint64_t seed = 0;
  int fold = 0;
  bool loose_folds = false;
  ScorerFlags scorer;
  ColumnMap columns;
};

void RunCurves(const CurveFlags& f, const std::vector<std::string>& argv,
               std::ostream& out) {
  const Dataset dataset = LoadNonEmpty(f.dataset, f.columns);
  const ScorerSpec scorer = ResolveScorer(f.scorer, dataset);
  if (scorer.kind == ScorerKind::kMajority || scorer.kind == ScorerKind::kRandom) {
    throw ValidationError("curves need a scoring method, not a baseline");
  }
  const std::vector<Fold> folds = MakeFolds(dataset.topics(), f.seed, !f.loose_folds);
  if (f.fold < 0 || static_cast<size_t>(f.fold) >= folds.size()) {
    throw ValidationError("fold must be in [0, " + std::to_string(folds.size()) + ")");
  }
  const Fold& fold = folds[f.fold];
  EnsureDirectory(f.output_dir);
  const FoldScoring scoring = ScoreFold(dataset, scorer, fold);
  const auto tuning = CollectTuningData(scoring.scores, dataset, scoring.tuning_topics);
  const std::vector<double> grid =
      DefaultGrid(scoring.scores, dataset, fold.test_topics);

  json summary = json::array();
  json configs = json::array();
  for (PolicyKind kind : kAllPolicies) {
    const PolicyConfig config = LearnPolicy(kind, tuning);
    const Curve curve =
        PrCurve(kind, config, scoring.scores, dataset, fold.test_topics, grid);
    const std::string name(PolicyName(kind));
    WriteFile(Join(f.output_dir, "curve_" + name + ".csv"), FormatCurve(curve));
    summary.push_back(CurveSummary(curve));
    configs.push_back(ToJson(config));
    const CurvePoint& best = curve.points[curve.best_index];
    out << name << ": best F1 " << FormatOptional(best.metrics.f1) << " at "
        << FormatDouble(best.threshold) << ", learned F1 "
        << FormatOptional(curve.chosen.metrics.f1) << "\n";
  }
  WriteFile(Join(f.output_dir, "summary.json"), Dump(summary));
  json manifest = Manifest("curves", argv);
  manifest["inputs"] = {{"dataset", f.dataset}};
  manifest["column_map"] = ToJson(f.columns);
  manifest["seed"] = f.seed;
  manifest["strict_folds"] = !f.loose_folds;
  manifest["fold"] = ToJson(fold);
  manifest["scorer"] = ScorerJson(f.scorer, scorer);
  manifest["policies"] = std::move(configs);
  WriteFile(Join(f.output_dir, "manifest.json"), Dump(manifest));
}

// --- assemble -----------------------------------------------------------------

// Joins the three-file release (arguments, key points, labels) into one
// pair dataset.
struct AssembleFlags {
  std::string arguments, key_points, labels, output;
};

std::string Field(const CsvTable& t, const CsvRecord& r, const std::string& name,
                  const std::string& path) {
  const auto col = t.Column(name);
  if (!col) throw ValidationError(path + ": missing column '" + name + "'");
  if (*col >= r.fields.size()) {
    throw ValidationError(path + ": short row at row " + std::to_string(r.line));
  }
  return r.fields[*col];
}

void RunAssemble(const AssembleFlags& f, std::ostream& out) {
  const CsvTable at = ReadCsvFile(f.arguments);
  const CsvTable kt = ReadCsvFile(f.key_points);
  const CsvTable lt = ReadCsvFile(f.labels);
  auto located = [](const std::string& path, const CsvRecord& r, auto fn) {
    try {
      return fn();
    } catch (const ValidationError& e) {
      throw ValidationError(path + ": " + e.what() + " at row " +
                            std::to_string(r.line));
    }
  };
  std::vector<Argument> arguments;
  for (const CsvRecord& r : at.rows) {
    Argument a;
    a.id = Field(at, r, "arg_id", f.arguments);
    a.text = Field(at, r, "argument", f.arguments);
    a.topic = Field(at, r, "topic", f.arguments);
    a.stance = located(f.arguments, r, [&] {
      return ParseStance(Field(at, r, "stance", f.arguments));
    });
    arguments.push_back(std::move(a));
  }
  std::vector<KeyPoint> key_points;
  for (const CsvRecord& r : kt.rows) {
    KeyPoint k;
    k.id = Field(kt, r, "key_point_id", f.key_points);
    k.text = Field(kt, r, "key_point", f.key_points);
    k.topic = Field(kt, r, "topic", f.key_points);
    k.stance = located(f.key_points, r, [&] {
      return ParseStance(Field(kt, r, "stance", f.key_points));
    });
    key_points.push_back(std::move(k));
  }
  std::vector<LabeledPair> pairs;
  for (const CsvRecord& r : lt.rows) {
    LabeledPair p;
    p.argument_id = Field(lt, r, "arg_id", f.labels);
    p.key_point_id = Field(lt, r, "key_point_id", f.labels);
    const std::string label = Field(lt, r, "label", f.labels);
    if (label == "1") {
      p.label = Label::kMatch;
    } else if (label == "0") {
      p.label = Label::kNoMatch;
    } else {
      throw ValidationError(f.labels + ": bad label '" + label + "' at row " +
                            std::to_string(r.line));
    }
    pairs.push_back(std::move(p));
  }
  const Dataset d = Dataset::Build(std::move(arguments), std::move(key_points),
                                   std::move(pairs));
  WriteDataset(d, f.output);
  out << FormatDatasetStats(ComputeDatasetStats(d), ComputeCategoryTextStats(d));
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
  CLI::App app{"Argument to key point matching: datasets, scoring and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  BuildFlags build;
  CLI::App* b = app.add_subcommand(
      "build-dataset", "Derive labeled pairs from raw annotator judgments");
  b->add_option("--judgments", build.judgments, "raw judgments CSV")
      ->required();
  b->add_option("--arguments,--gold-stance", build.arguments,
                "arguments CSV with gold stance")
      ->required();
  b->add_option("--key-points", build.key_points, "key points CSV")->required();
  b->add_option("--output", build.output, "output dataset CSV")->required();
  b->add_option("--stats", build.stats,
                "statistics JSON (default: <output>.stats.json)");
  FilterOptions& fo = build.options.filter;
  b->add_option("--max-stance-error", fo.max_stance_error)->capture_default_str();
  b->add_option("--min-kappa", fo.min_kappa)->capture_default_str();
  b->add_option("--min-shared", fo.min_shared)->capture_default_str();
  b->add_option("--min-partners", fo.min_partners)->capture_default_str();
  b->add_option("--majority", build.options.majority)->capture_default_str();
  b->add_option("--min-judgments", build.options.min_judgments)
      ->capture_default_str();
  b->add_option("--positive-min", build.options.positive_min)
      ->capture_default_str();
  b->add_option("--negative-max", build.options.negative_max)
      ->capture_default_str();
  b->add_option("--min-matches-per-kp", build.options.min_matches_per_kp)
      ->capture_default_str();

  EvalFlags eval;
  CLI::App* e = app.add_subcommand(
      "evaluate", "Cross-topic four-fold evaluation of a scorer and policy");
  e->add_option("--dataset", eval.dataset, "pair dataset CSV")->required();
  AddScorerFlags(e, &eval.scorer);
  e->add_option("--policy", eval.policy,
                "threshold | best-match | bm-threshold | dual-threshold | all")
      ->capture_default_str();
  e->add_option("--seed", eval.seed, "fold seed")->capture_default_str();
  e->add_option("--output-dir", eval.output_dir)->required();
  e->add_flag("--loose-folds", eval.loose_folds,
              "allow any topic count divisible by four");
  AddColumnFlags(e, &eval.columns);

  CurveFlags curves;
  CLI::App* c = app.add_subcommand(
      "curves", "Precision/recall curves of every policy on one test fold");
  c->add_option("--dataset", curves.dataset, "pair dataset CSV")->required();
  AddScorerFlags(c, &curves.scorer);
  c->add_option("--fold", curves.fold)->capture_default_str();
  c->add_option("--seed", curves.seed)->capture_default_str();
  c->add_option("--output-dir", curves.output_dir)->required();
  c->add_flag("--loose-folds", curves.loose_folds,
              "allow any topic count divisible by four");
  AddColumnFlags(c, &curves.columns);

  std::string cov_dataset, cov_output;
  ColumnMap cov_columns;
  CLI::App* v = app.add_subcommand(
      "coverage", "Mean argument coverage of the top-k key points");
  v->add_option("--dataset", cov_dataset)->required();
  v->add_option("--output", cov_output)->required();
  AddColumnFlags(v, &cov_columns);

  std::string stats_dataset;
  ColumnMap stats_columns;
  CLI::App* s = app.add_subcommand("stats", "Dataset statistics");
  s->add_option("--dataset", stats_dataset)->required();
  AddColumnFlags(s, &stats_columns);

  std::string tfidf_dataset, tfidf_output;
  ColumnMap tfidf_columns;
  CLI::App* t = app.add_subcommand(
      "score-tfidf", "Write tf-idf scores fitted on the whole dataset");
  t->add_option("--dataset", tfidf_dataset)->required();
  t->add_option("--output", tfidf_output)->required();
  AddColumnFlags(t, &tfidf_columns);

  AssembleFlags assemble;
  CLI::App* a = app.add_subcommand(
      "assemble", "Join separate arguments, key points and labels files");
  a->add_option("--arguments", assemble.arguments)->required();
  a->add_option("--key-points", assemble.key_points)->required();
  a->add_option("--labels", assemble.labels)->required();
  a->add_option("--output", assemble.output)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }

  try {
    if (*b) {
      RunBuild(build, args, out);
    } else if (*e) {
      RunEvaluate(eval, args, out);
    } else if (*c) {
      RunCurves(curves, args, out);
    } else if (*v) {
      const Dataset d = LoadNonEmpty(cov_dataset, cov_columns);
      WriteFile(cov_output, FormatCoverage(CoverageCurve(CoverageGroupsOf(d))));
    } else if (*s) {
      const Dataset d = LoadDataset(stats_dataset, stats_columns);
      out << FormatDatasetStats(ComputeDatasetStats(d),
                                ComputeCategoryTextStats(d));
    } else if (*t) {
      const Dataset d = LoadNonEmpty(tfidf_dataset, tfidf_columns);
      WriteScores(ScoreDatasetTfIdf(d, d.topics()), tfidf_output);
    } else if (*a) {
      RunAssemble(assemble, out);
    }
  } catch (const IoError& ex) {
    err << "error: " << ex.what() << "\n";
    return 2;
  } catch (const ValidationError& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

int RunCli(int argc, const char* const* argv) {
  return RunCli(argc, argv, std::cout, std::cerr);
}

}  // namespace kpm
