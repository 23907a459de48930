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

#include <gtest/gtest.h>

#include <cmath>

#include "cxrlt/error.hpp"
#include "oracles.hpp"

namespace cxrlt {
namespace {

using Labels = std::vector<std::uint8_t>;
using Scores = std::vector<double>;

ScoreMatrix scores_of(const std::vector<Scores>& columns) {
  ScoreMatrix m;
  m.values.resize(static_cast<Eigen::Index>(columns[0].size()), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    for (std::size_t i = 0; i < columns[c].size(); ++i) m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = columns[c][i];
  }
  m.class_names.resize(columns.size());
  return m;
}

LabelMatrix labels_of(const std::vector<Labels>& columns) {
  LabelMatrix m;
  m.values.resize(static_cast<Eigen::Index>(columns[0].size()), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    for (std::size_t i = 0; i < columns[c].size(); ++i) m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = columns[c][i];
  }
  m.class_names.resize(columns.size());
  return m;
}

TEST(AveragePrecision, WorkedExample) {
  EXPECT_NEAR(average_precision(Scores{0.9, 0.8, 0.3, 0.1}, Labels{1, 0, 1, 0}), 5.0 / 6.0, 1e-12);
}

TEST(AveragePrecision, PerfectRanking) {
  EXPECT_DOUBLE_EQ(average_precision(Scores{0.9, 0.8, 0.3, 0.1}, Labels{1, 1, 0, 0}), 1.0);
}

TEST(AveragePrecision, ConstantScoresGivePrevalence) {
  EXPECT_DOUBLE_EQ(average_precision(Scores(5, 0.4), Labels{1, 0, 0, 1, 0}), 0.4);
}

TEST(AveragePrecision, NoPositivesIsUndefined) {
  EXPECT_THROW(average_precision(Scores{0.1, 0.2}, Labels{0, 0}), UndefinedMetricError);
}

TEST(AveragePrecision, MatchesOracleWithTies) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.index(32);
    const Scores s = oracle::tied_scores(rng, n);
    Labels y(n);
    for (auto& v : y) v = rng.bernoulli(0.4);
    y[rng.index(n)] = 1;
    EXPECT_NEAR(average_precision(s, y), oracle::average_precision(s, y), 1e-9);
  }
}

TEST(AveragePrecision, InvariantUnderMonotoneTransform) {
  Rng rng(3);
  Scores s(20);
  Labels y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    s[i] = rng.uniform();
    y[i] = rng.bernoulli(0.5);
  }
  y[0] = 1;
  Scores t(20);
  for (std::size_t i = 0; i < 20; ++i) t[i] = std::exp(3.0 * s[i]) - 7.0;
  EXPECT_NEAR(average_precision(s, y), average_precision(t, y), 1e-12);
  EXPECT_NEAR(roc_auc(s, y).auc, roc_auc(t, y).auc, 1e-12);
}

TEST(PrecisionRecall, RecallNonDecreasing) {
  const PRCurve c = precision_recall_curve(Scores{0.5, 0.9, 0.1, 0.9, 0.3}, Labels{1, 0, 1, 1, 0});
  ASSERT_EQ(c.thresholds.size(), 4u);
  for (std::size_t k = 1; k < c.recall.size(); ++k) {
    EXPECT_GE(c.recall[k], c.recall[k - 1]);
    EXPECT_LT(c.thresholds[k], c.thresholds[k - 1]);
  }
  EXPECT_DOUBLE_EQ(c.recall.back(), 1.0);
}

TEST(MeanAp, TwoClasses) {
  const auto s = scores_of({{0.9, 0.1}, {0.1, 0.9}});
  const auto y = labels_of({{1, 0}, {1, 0}});
  const ClassMetric m = mean_ap(s, y);
  ASSERT_EQ(m.per_class.size(), 2u);
  EXPECT_DOUBLE_EQ(m.per_class[0], 1.0);
  EXPECT_DOUBLE_EQ(m.per_class[1], 0.5);
  EXPECT_DOUBLE_EQ(m.mean, 0.75);
  const int only[] = {1};
  EXPECT_DOUBLE_EQ(mean_ap(s, y, only).mean, 0.5);
}

TEST(MeanAp, RandomInstanceMatchesOracle) {
  Rng rng(11);
  std::vector<Scores> s(4, Scores(20));
  std::vector<Labels> y(4, Labels(20));
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 20; ++i) {
      s[c][i] = rng.uniform();
      y[c][i] = rng.bernoulli(0.3);
    }
    y[c][c] = 1;
  }
  const ClassMetric m = mean_ap(scores_of(s), labels_of(y));
  double mean = 0.0;
  for (int c = 0; c < 4; ++c) {
    EXPECT_NEAR(m.per_class[c], oracle::average_precision(s[c], y[c]), 1e-9);
    mean += m.per_class[c] / 4;
  }
  EXPECT_DOUBLE_EQ(m.mean, mean);
}

TEST(MeanAp, ClassWithoutPositivesPropagates) {
  EXPECT_THROW(mean_ap(scores_of({{0.2, 0.3}}), labels_of({{0, 0}})), UndefinedMetricError);
}

TEST(MacroF1, Conventions) {
  const double half[] = {0.5, 0.5};
  EXPECT_DOUBLE_EQ(macro_f1(scores_of({{0.9, 0.1}, {0.8, 0.2}}), labels_of({{1, 0}, {1, 0}}), half).mean, 1.0);
  // TP = 1, FP = 1, FN = 1.
  const double one[] = {0.5};
  EXPECT_DOUBLE_EQ(macro_f1(scores_of({{0.9, 0.8, 0.1}}), labels_of({{1, 0, 1}}), one).per_class[0], 0.5);
  EXPECT_DOUBLE_EQ(macro_f1(scores_of({{0.1, 0.2}}), labels_of({{0, 0}}), one).per_class[0], 0.0);
  EXPECT_THROW(macro_f1(scores_of({{0.1}}), labels_of({{0}}), half), ShapeError);
}

TEST(RocAuc, EdgeCases) {
  EXPECT_DOUBLE_EQ(roc_auc(Scores{0.9, 0.8, 0.2}, Labels{1, 1, 0}).auc, 1.0);
  EXPECT_DOUBLE_EQ(roc_auc(Scores(6, 0.3), Labels{1, 0, 1, 0, 0, 1}).auc, 0.5);
  EXPECT_THROW(roc_auc(Scores{0.1, 0.2}, Labels{1, 1}), UndefinedMetricError);
}

TEST(RocAuc, CurveEndpointsAndMonotone) {
  const RocResult r = roc_auc(Scores{0.4, 0.4, 0.9, 0.1, 0.6}, Labels{1, 0, 1, 0, 0});
  EXPECT_EQ(r.curve.tpr.front(), 0.0);
  EXPECT_EQ(r.curve.fpr.front(), 0.0);
  EXPECT_EQ(r.curve.tpr.back(), 1.0);
  EXPECT_EQ(r.curve.fpr.back(), 1.0);
  for (std::size_t k = 1; k < r.curve.tpr.size(); ++k) {
    EXPECT_GE(r.curve.tpr[k], r.curve.tpr[k - 1]);
    EXPECT_GE(r.curve.fpr[k], r.curve.fpr[k - 1]);
  }
}

TEST(RocAuc, MatchesPairOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Scores s = oracle::tied_scores(rng, 30);
    Labels y(30);
    for (auto& v : y) v = rng.bernoulli(0.5);
    y[0] = 1;
    y[1] = 0;
    EXPECT_NEAR(roc_auc(s, y).auc, oracle::roc_auc(s, y), 1e-12);
  }
}

TEST(Youden, WorkedExample) {
  const YoudenResult r = youden_threshold(Scores{0.9, 0.8, 0.2, 0.1}, Labels{1, 1, 0, 0});
  EXPECT_DOUBLE_EQ(r.threshold, 0.8);
  EXPECT_DOUBLE_EQ(r.j, 1.0);
}

TEST(Youden, InterleavedMatchesScan) {
  const Scores s{0.8, 0.6, 0.4, 0.2};
  const Labels y{1, 0, 1, 0};
  const auto [t, j] = oracle::youden(s, y);
  const YoudenResult r = youden_threshold(s, y);
  EXPECT_EQ(r.threshold, t);
  EXPECT_EQ(r.j, j);
  // J = 0.5 at both 0.8 and 0.4; the larger threshold wins.
  EXPECT_EQ(r.threshold, 0.8);
}

TEST(Youden, ConstantScoresSingleCandidate) {
  const YoudenResult r = youden_threshold(Scores(4, 0.7), Labels{1, 0, 1, 0});
  EXPECT_EQ(r.threshold, 0.7);
  EXPECT_EQ(r.j, 0.0);
  EXPECT_THROW(youden_threshold(Scores{0.1}, Labels{0}), UndefinedMetricError);
}

TEST(GroupFnr, Counts) {
  const Scores s{0.9, 0.8, 0.7, 0.2, 0.9};
  const Labels y{1, 1, 1, 1, 1};
  const std::vector<std::uint8_t> mask{1, 1, 1, 1, 0};
  EXPECT_DOUBLE_EQ(*group_fnr(s, y, mask, 0.5), 0.25);
  EXPECT_DOUBLE_EQ(*group_fnr(s, y, mask, 0.1), 0.0);
  EXPECT_FALSE(group_fnr(s, Labels{0, 0, 0, 0, 1}, mask, 0.5).has_value());
}

}  // namespace
}  // namespace cxrlt
