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

#ifndef CXRLT_METRICS_HPP_
#define CXRLT_METRICS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cxrlt/datakit.hpp"

namespace cxrlt {

// One point per unique score, highest score first. A sample is called
// positive at threshold t when score >= t.
struct PRCurve {
  std::vector<double> thresholds;
  std::vector<double> precision;
  std::vector<double> recall;
};

// Starts at (0, 0) with threshold +inf, then one point per unique score;
// the last point is (1, 1).
struct ROCCurve {
  std::vector<double> thresholds;
  std::vector<double> tpr;
  std::vector<double> fpr;
};

PRCurve precision_recall_curve(std::span<const double> scores,
                               std::span<const std::uint8_t> labels);

// Step-wise AP: sum_k (R_k - R_{k-1}) P_k over descending unique scores.
// Throws UndefinedMetricError without positives.
double average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct ClassMetric {
  double mean = 0.0;
  std::vector<double> per_class;
};

// Unweighted mean of per-class AP over `classes` (all classes when empty);
// per_class is aligned with the chosen classes.
ClassMetric mean_ap(const ScoreMatrix& scores, const LabelMatrix& labels,
                    std::span<const int> classes = {});

// F1 = 2TP / (2TP + FP + FN) per class at score >= threshold[c]; 0 when the
// denominator is 0. `thresholds` has one entry per class.
ClassMetric macro_f1(const ScoreMatrix& scores, const LabelMatrix& labels,
                     std::span<const double> thresholds);

struct RocResult {
  ROCCurve curve;
  double auc = 0.0;
};

// Trapezoidal AUC over the tie-grouped ROC curve. Throws UndefinedMetricError
// unless both classes are present.
RocResult roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct YoudenResult {
  double threshold = 0.0;
  double j = 0.0;
};

// Maximizes J = TPR - FPR over the unique observed scores; ties go to the
// larger threshold.
YoudenResult youden_threshold(std::span<const double> scores,
                              std::span<const std::uint8_t> labels);

// Fraction of the group's positives scored below the threshold. nullopt when
// the group has no positives.
std::optional<double> group_fnr(std::span<const double> scores,
                                std::span<const std::uint8_t> labels,
                                std::span<const std::uint8_t> group_mask, double threshold);

struct DemographicGroups {
  std::vector<std::string> names;  // categories present, in enum order
  std::vector<int> group_of;       // per sample, index into names
};

DemographicGroups demographic_groups(const DatasetManifest& manifest, Attribute attribute);

struct ExcludedClass {
  int class_index = -1;
  std::string reason;
};

struct FairnessReport {
  std::string attribute;
  std::vector<std::string> groups;
  std::vector<int> classes;             // evaluated classes, in order
  Eigen::MatrixXd per_class_fnr;        // classes x groups; NaN when undefined
  std::vector<double> per_class_eo_ratio;  // NaN for excluded classes
  std::vector<double> thresholds_used;     // pooled Youden threshold, NaN if none
  std::vector<int> included_classes;
  std::vector<ExcludedClass> excluded;
  double eo_mean = 0.0;
  double eo_std = 0.0;  // population std over included classes
};

// Equality of opportunity: for each class a pooled Youden threshold, the FNR
// of every group, and the ratio min FNR / max FNR (1 when max is 0). Classes
// where some group has no positives are excluded. Throws ConfigError with
// fewer than two groups.
FairnessReport equality_of_opportunity(const ScoreMatrix& scores, const LabelMatrix& labels,
                                       const DemographicGroups& groups,
                                       std::span<const int> classes = {},
                                       std::string attribute = {});

}  // namespace cxrlt

#endif  // CXRLT_METRICS_HPP_
