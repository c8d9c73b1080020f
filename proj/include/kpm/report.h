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

#ifndef KPM_REPORT_H_
#define KPM_REPORT_H_

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kpm/annotation.h"
#include "kpm/corpus.h"
#include "kpm/eval.h"
#include "kpm/policies.h"

namespace kpm {

// Undefined values print as "-" in tables, as empty CSV fields and as JSON
// null. Infinite thresholds print as "inf" / "-inf".
std::string FormatOptional(const std::optional<double>& value);

nlohmann::json ToJson(const PolicyConfig& config);
PolicyConfig PolicyConfigFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const Metrics& metrics);
nlohmann::json ToJson(const Averages& averages);
nlohmann::json ToJson(const Fold& fold);
nlohmann::json ToJson(const EvalReport& report);
nlohmann::json ToJson(const DatasetStats& stats);
nlohmann::json ToJson(const std::vector<CategoryTextStats>& stats);

// Per-fold and averaged rows: accuracy, P, R, F1 over all arguments, P/R/F1
// for single and multiple key point arguments, accuracy for no key point.
std::string FormatReportTable(const EvalReport& report);

// "threshold,precision,recall,f1", one row per curve point.
std::string FormatCurve(const Curve& curve);
nlohmann::json CurveSummary(const Curve& curve);

// "k,mean_coverage".
std::string FormatCoverage(const std::vector<double>& coverage);

std::string FormatDatasetStats(const DatasetStats& stats,
                               const std::vector<CategoryTextStats>& categories);

// Category fractions, agreement values and per-annotator filter outcomes.
nlohmann::json AnnotationSummary(const AnnotationRun& run);

}  // namespace kpm

#endif  // KPM_REPORT_H_
