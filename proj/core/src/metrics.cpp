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

#include "cxrlt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cxrlt/error.hpp"

namespace cxrlt {
namespace {

// Cumulative (tp, fp) after each group of equal scores, highest first.
struct OperatingPoints {
  std::vector<double> thresholds;
  std::vector<long> tp, fp;
  long positives = 0;
  long negatives = 0;
};

OperatingPoints operating_points(std::span<const double> scores,
                                 std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw ShapeError("scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  OperatingPoints op;
  long tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    if (labels[i]) ++tp; else ++fp;
    if (k + 1 == order.size() || scores[order[k + 1]] != scores[i]) {
      op.thresholds.push_back(scores[i]);
      op.tp.push_back(tp);
      op.fp.push_back(fp);
    }
  }
  op.positives = tp;
  op.negatives = fp;
  return op;
}

std::span<const double> column(const ScoreMatrix& m, int c) {
  return {m.values.col(c).data(), static_cast<std::size_t>(m.values.rows())};
}

std::span<const std::uint8_t> column(const LabelMatrix& m, int c) {
  return {m.values.col(c).data(), static_cast<std::size_t>(m.values.rows())};
}

void check_matrices(const ScoreMatrix& scores, const LabelMatrix& labels) {
  if (scores.values.rows() != labels.values.rows() ||
      scores.values.cols() != labels.values.cols()) {
    throw ShapeError("score and label matrices differ in shape");
  }
}

std::vector<int> resolve_classes(std::span<const int> classes, Eigen::Index num_classes) {
  std::vector<int> out(classes.begin(), classes.end());
  if (out.empty()) {
    out.resize(static_cast<std::size_t>(num_classes));
    std::iota(out.begin(), out.end(), 0);
  }
  for (int c : out) {
    if (c < 0 || c >= num_classes) throw ShapeError("class index " + std::to_string(c) + " out of range");
  }
  return out;
}

}  // namespace

PRCurve precision_recall_curve(std::span<const double> scores,
                               std::span<const std::uint8_t> labels) {
  const OperatingPoints op = operating_points(scores, labels);
  if (op.positives == 0) throw UndefinedMetricError("precision-recall undefined without positives");
  PRCurve curve;
  for (std::size_t k = 0; k < op.thresholds.size(); ++k) {
    curve.thresholds.push_back(op.thresholds[k]);
    curve.precision.push_back(static_cast<double>(op.tp[k]) / static_cast<double>(op.tp[k] + op.fp[k]));
    curve.recall.push_back(static_cast<double>(op.tp[k]) / static_cast<double>(op.positives));
  }
  return curve;
}

double average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const PRCurve curve = precision_recall_curve(scores, labels);
  double ap = 0.0, prev_recall = 0.0;
  for (std::size_t k = 0; k < curve.thresholds.size(); ++k) {
    ap += (curve.recall[k] - prev_recall) * curve.precision[k];
    prev_recall = curve.recall[k];
  }
  return ap;
}

ClassMetric mean_ap(const ScoreMatrix& scores, const LabelMatrix& labels,
                    std::span<const int> classes) {
  check_matrices(scores, labels);
  const std::vector<int> cls = resolve_classes(classes, scores.values.cols());
  ClassMetric out;
  for (int c : cls) {
    try {
      out.per_class.push_back(average_precision(column(scores, c), column(labels, c)));
    } catch (const UndefinedMetricError&) {
      const std::string name = static_cast<std::size_t>(c) < labels.class_names.size()
                                   ? labels.class_names[static_cast<std::size_t>(c)]
                                   : std::to_string(c);
      throw UndefinedMetricError("AP undefined for class '" + name + "': no positives");
    }
  }
  out.mean = std::accumulate(out.per_class.begin(), out.per_class.end(), 0.0) /
             static_cast<double>(out.per_class.size());
  return out;
}

ClassMetric macro_f1(const ScoreMatrix& scores, const LabelMatrix& labels,
                     std::span<const double> thresholds) {
  check_matrices(scores, labels);
  if (static_cast<Eigen::Index>(thresholds.size()) != scores.values.cols()) {
    throw ShapeError("macro_f1 needs one threshold per class");
  }
  ClassMetric out;
  for (Eigen::Index c = 0; c < scores.values.cols(); ++c) {
    long tp = 0, fp = 0, fn = 0;
    for (Eigen::Index i = 0; i < scores.values.rows(); ++i) {
      const bool predicted = scores.values(i, c) >= thresholds[static_cast<std::size_t>(c)];
      const bool actual = labels.values(i, c) != 0;
      tp += predicted && actual;
      fp += predicted && !actual;
      fn += !predicted && actual;
    }
    const long denom = 2 * tp + fp + fn;
    out.per_class.push_back(denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom));
  }
  out.mean = out.per_class.empty() ? 0.0
                                   : std::accumulate(out.per_class.begin(), out.per_class.end(), 0.0) /
                                         static_cast<double>(out.per_class.size());
  return out;
}

RocResult roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const OperatingPoints op = operating_points(scores, labels);
  if (op.positives == 0 || op.negatives == 0) {
    throw UndefinedMetricError("ROC AUC needs both positive and negative samples");
  }
  RocResult r;
  r.curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  r.curve.tpr.push_back(0.0);
  r.curve.fpr.push_back(0.0);
  const double p = static_cast<double>(op.positives);
  const double n = static_cast<double>(op.negatives);
  for (std::size_t k = 0; k < op.thresholds.size(); ++k) {
    const double tpr = static_cast<double>(op.tp[k]) / p;
    const double fpr = static_cast<double>(op.fp[k]) / n;
    r.auc += (fpr - r.curve.fpr.back()) * (tpr + r.curve.tpr.back()) / 2.0;
    r.curve.thresholds.push_back(op.thresholds[k]);
    r.curve.tpr.push_back(tpr);
    r.curve.fpr.push_back(fpr);
  }
  return r;
}

YoudenResult youden_threshold(std::span<const double> scores,
                              std::span<const std::uint8_t> labels) {
  const OperatingPoints op = operating_points(scores, labels);
  if (op.positives == 0 || op.negatives == 0) {
    throw UndefinedMetricError("Youden index needs both positive and negative samples");
  }
  const double p = static_cast<double>(op.positives);
  const double n = static_cast<double>(op.negatives);
  YoudenResult best{op.thresholds.front(), -std::numeric_limits<double>::infinity()};
  for (std::size_t k = 0; k < op.thresholds.size(); ++k) {
    const double j = static_cast<double>(op.tp[k]) / p - static_cast<double>(op.fp[k]) / n;
    if (j > best.j) best = {op.thresholds[k], j};
  }
  return best;
}

std::optional<double> group_fnr(std::span<const double> scores,
                                std::span<const std::uint8_t> labels,
                                std::span<const std::uint8_t> group_mask, double threshold) {
  if (scores.size() != labels.size() || scores.size() != group_mask.size()) {
    throw ShapeError("group_fnr inputs differ in length");
  }
  long positives = 0, missed = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!group_mask[i] || !labels[i]) continue;
    ++positives;
    missed += scores[i] < threshold;
  }
  if (positives == 0) return std::nullopt;
  return static_cast<double>(missed) / static_cast<double>(positives);
}

DemographicGroups demographic_groups(const DatasetManifest& manifest, Attribute attribute) {
  const int categories = attribute == Attribute::kRace ? 5 : 2;
  std::vector<char> present(static_cast<std::size_t>(categories), 0);
  std::vector<int> raw;
  raw.reserve(manifest.size());
  for (const Record& r : manifest.records()) {
    const int g = attribute == Attribute::kRace ? static_cast<int>(r.race) : static_cast<int>(r.gender);
    raw.push_back(g);
    present[static_cast<std::size_t>(g)] = 1;
  }
  DemographicGroups out;
  std::vector<int> remap(static_cast<std::size_t>(categories), -1);
  for (int g = 0; g < categories; ++g) {
    if (!present[static_cast<std::size_t>(g)]) continue;
    remap[static_cast<std::size_t>(g)] = static_cast<int>(out.names.size());
    out.names.emplace_back(attribute == Attribute::kRace ? to_string(static_cast<Race>(g))
                                                         : to_string(static_cast<Gender>(g)));
  }
  for (int g : raw) out.group_of.push_back(remap[static_cast<std::size_t>(g)]);
  return out;
}

FairnessReport equality_of_opportunity(const ScoreMatrix& scores, const LabelMatrix& labels,
                                       const DemographicGroups& groups,
                                       std::span<const int> classes, std::string attribute) {
  check_matrices(scores, labels);
  if (groups.group_of.size() != static_cast<std::size_t>(scores.values.rows())) {
    throw ShapeError("group assignment length differs from the sample count");
  }
  if (groups.names.size() < 2) {
    throw ConfigError("equality of opportunity needs at least two demographic groups");
  }
  const std::size_t num_groups = groups.names.size();
  const std::size_t n = groups.group_of.size();
  std::vector<std::vector<std::uint8_t>> masks(num_groups, std::vector<std::uint8_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    const int g = groups.group_of[i];
    if (g < 0 || static_cast<std::size_t>(g) >= num_groups) throw ShapeError("group index out of range");
    masks[static_cast<std::size_t>(g)][i] = 1;
  }

  FairnessReport report;
  report.attribute = std::move(attribute);
  report.groups = groups.names;
  report.classes = resolve_classes(classes, scores.values.cols());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  report.per_class_fnr = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(report.classes.size()),
                                                   static_cast<Eigen::Index>(num_groups), nan);
  report.per_class_eo_ratio.assign(report.classes.size(), nan);
  report.thresholds_used.assign(report.classes.size(), nan);

  for (std::size_t k = 0; k < report.classes.size(); ++k) {
    const int c = report.classes[k];
    const auto s = column(scores, c);
    const auto y = column(labels, c);
    double threshold;
    try {
      threshold = youden_threshold(s, y).threshold;
    } catch (const UndefinedMetricError&) {
      report.excluded.push_back({c, "pooled data lacks positives or negatives"});
      continue;
    }
    report.thresholds_used[k] = threshold;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    std::string missing;
    for (std::size_t g = 0; g < num_groups; ++g) {
      const auto fnr = group_fnr(s, y, masks[g], threshold);
      if (!fnr) {
        missing += (missing.empty() ? "" : ", ") + groups.names[g];
        continue;
      }
      report.per_class_fnr(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(g)) = *fnr;
      lo = std::min(lo, *fnr);
      hi = std::max(hi, *fnr);
    }
    if (!missing.empty()) {
      report.excluded.push_back({c, "no positives in group(s): " + missing});
      continue;
    }
    report.per_class_eo_ratio[k] = hi == 0.0 ? 1.0 : lo / hi;
    report.included_classes.push_back(c);
  }

  std::vector<double> ratios;
  for (std::size_t k = 0; k < report.classes.size(); ++k) {
    if (!std::isnan(report.per_class_eo_ratio[k])) ratios.push_back(report.per_class_eo_ratio[k]);
  }
  if (ratios.empty()) {
    report.eo_mean = report.eo_std = nan;
    return report;
  }
  const double m = static_cast<double>(ratios.size());
  report.eo_mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) / m;
  double var = 0.0;
  for (double r : ratios) var += (r - report.eo_mean) * (r - report.eo_mean);
  report.eo_std = std::sqrt(var / m);
  return report;
}

}  // namespace cxrlt
