/*
 * Copyright 2026 The cxrlt Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CXRLT_REPORT_HPP_
#define CXRLT_REPORT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cxrlt/datakit.hpp"
#include "cxrlt/metrics.hpp"

namespace cxrlt {

enum class F1Thresholds { kFixed, kYouden };

struct EvaluateOptions {
  F1Thresholds f1_thresholds = F1Thresholds::kFixed;
  double fixed_threshold = 0.5;
};

struct ClassReport {
  int index = 0;
  std::string name;
  long positives = 0;
  long negatives = 0;
  std::optional<double> ap;      // absent without positives
  std::optional<double> auc;     // absent unless both labels occur
  std::optional<double> youden;  // pooled Youden threshold
  double f1_threshold = 0.5;
  double f1 = 0.0;
};

struct EvaluationReport {
  std::string title;
  std::vector<ClassReport> classes;
  double map = 0.0;       // over classes with a defined AP
  double mf1 = 0.0;       // over every class
  double mean_auc = 0.0;  // over classes with a defined AUC
  std::vector<int> map_classes;
  std::optional<FairnessReport> fairness;
};

EvaluationReport evaluate(const ScoreMatrix& scores, const LabelMatrix& labels,
                          const EvaluateOptions& options = {}, std::string title = {});

std::string to_json(const EvaluationReport& report);
std::string to_json(const FairnessReport& report);

// threshold,precision,recall,tpr,fpr over the unique scores of one class.
// Empty when the class lacks positives or negatives.
std::string format_curve_csv(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct RocPanel {
  std::string name;
  ROCCurve curve;
  double auc = 0.0;
};

std::string roc_grid_svg(const std::vector<RocPanel>& panels);

// Grouped bars: one group per class, one bar per named series.
std::string ap_bar_svg(const std::vector<std::string>& class_names,
                       const std::vector<std::pair<std::string, std::vector<double>>>& series);

// Writes report.json, curves/<index>.csv, roc.svg and ap.svg into `dir`.
void write_report(const std::filesystem::path& dir, const EvaluationReport& report,
                  const ScoreMatrix& scores, const LabelMatrix& labels);

}  // namespace cxrlt

#endif  // CXRLT_REPORT_HPP_
