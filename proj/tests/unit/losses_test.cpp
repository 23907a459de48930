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

#include "cxrlt/losses.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "cxrlt/error.hpp"
#include "oracles.hpp"

namespace cxrlt {
namespace {

Tensor random_labels(Rng& rng, int rows, int cols) {
  Tensor y(rows, cols);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.bernoulli(0.4);
  return y;
}

double naive_bce(double z, double y) {
  const double p = 1.0 / (1.0 + std::exp(-z));
  return -(y * std::log(p) + (1 - y) * std::log(1 - p));
}

TEST(Bce, MatchesNaiveFormula) {
  Rng rng(1);
  const Tensor z = oracle::random_tensor(rng, 3, 4, 2.0);
  const Tensor y = random_labels(rng, 3, 4);
  double expected = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) expected += naive_bce(z.data()[i], y.data()[i]);
  EXPECT_NEAR(bce(z, y).value, expected / 12.0, 1e-12);
}

TEST(Bce, ZeroLogitIsLogTwo) {
  EXPECT_NEAR(bce(Tensor::Zero(1, 1), Tensor::Ones(1, 1)).value, std::log(2.0), 1e-15);
}

TEST(Bce, StableForLargeLogits) {
  Tensor z(1, 2);
  z << 800.0, -800.0;
  Tensor y(1, 2);
  y << 0.0, 1.0;
  const LossValue v = bce(z, y);
  EXPECT_NEAR(v.value, 800.0, 1e-9);
  EXPECT_TRUE(v.grad.allFinite());
  const double alpha[] = {0.25, 0.25};
  EXPECT_TRUE(std::isfinite(focal_loss(z, y, alpha, 2.0).value));
}

TEST(WeightedBce, UnitWeightsEqualBce) {
  Rng rng(2);
  const Tensor z = oracle::random_tensor(rng, 4, 3);
  const Tensor y = random_labels(rng, 4, 3);
  const double w[] = {1.0, 1.0, 1.0};
  EXPECT_NEAR(weighted_bce(z, y, w).value, bce(z, y).value, 1e-14);
}

TEST(FocalLoss, GammaZeroIsHalfBceAtHalfAlpha) {
  Rng rng(3);
  const Tensor z = oracle::random_tensor(rng, 4, 3);
  const Tensor y = random_labels(rng, 4, 3);
  const double a[] = {0.5, 0.5, 0.5};
  EXPECT_NEAR(focal_loss(z, y, a, 0.0).value, 0.5 * bce(z, y).value, 1e-14);
}

TEST(FocalLoss, DownWeightsEasyExamples) {
  Tensor z(1, 1);
  z << 4.0;
  const Tensor y = Tensor::Ones(1, 1);
  const double a[] = {0.5};
  EXPECT_LT(focal_loss(z, y, a, 2.0).value, 0.5 * bce(z, y).value * 0.01);
}

double loss_at(LossKind kind, const Tensor& z, const Tensor& y, std::span<const double> weights) {
  switch (kind) {
    case LossKind::kBce: return bce(z, y).value;
    case LossKind::kWeightedBce: return weighted_bce(z, y, weights).value;
    case LossKind::kFocal: return focal_loss(z, y, weights, 2.0).value;
  }
  return 0.0;
}

class LossGradient : public ::testing::TestWithParam<std::tuple<LossKind, int>> {};

TEST_P(LossGradient, MatchesFiniteDifferences) {
  const auto [kind, seed] = GetParam();
  Rng rng(static_cast<std::uint64_t>(seed));
  Tensor z = oracle::random_tensor(rng, 3, 5, 3.0);
  const Tensor y = random_labels(rng, 3, 5);
  std::vector<double> weights(5);
  for (double& w : weights) w = kind == LossKind::kFocal ? rng.uniform(0.1, 0.9) : rng.uniform(0.5, 5.0);
  Tensor analytic;
  if (kind == LossKind::kBce) analytic = bce(z, y).grad;
  if (kind == LossKind::kWeightedBce) analytic = weighted_bce(z, y, weights).grad;
  if (kind == LossKind::kFocal) analytic = focal_loss(z, y, weights, 2.0).grad;
  const auto pair = oracle::check_entries(z, analytic, [&] { return loss_at(kind, z, y, weights); }, rng, 15);
  EXPECT_LT(oracle::relative_error(pair.analytic, pair.numeric), 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Seeds, LossGradient,
                         ::testing::Combine(::testing::Values(LossKind::kBce, LossKind::kWeightedBce,
                                                              LossKind::kFocal),
                                            ::testing::Range(0, 5)));

TEST(PosWeights, NegativesOverPositives) {
  LabelMatrix m;
  m.class_names = {"a", "b"};
  m.values.resize(4, 2);
  m.values << 1, 1, 0, 1, 0, 1, 0, 0;
  const auto w = compute_pos_weights(m);
  EXPECT_DOUBLE_EQ(w[0], 3.0);
  EXPECT_DOUBLE_EQ(w[1], 1.0 / 3.0);
  m.values.col(0).setZero();
  try {
    compute_pos_weights(m);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'a'"), std::string::npos);
  }
}

TEST(FocalAlpha, WeakerClassesWeighMore) {
  const double ap[] = {0.9, 0.5, 0.1};
  const auto alpha = focal_alpha_from_ap(ap);
  EXPECT_LT(alpha[0], alpha[1]);
  EXPECT_LT(alpha[1], alpha[2]);
  for (double a : alpha) {
    EXPECT_GE(a, 0.01);
    EXPECT_LE(a, 1.0);
  }
}

TEST(LossConfig, Validation) {
  LossConfig c;
  c.kind = LossKind::kWeightedBce;
  EXPECT_THROW(c.validate(3), ConfigError);
  c.pos_weights = {1.0, 2.0, -1.0};
  EXPECT_THROW(c.validate(3), ConfigError);
  EXPECT_EQ(parse_loss_kind("focal"), LossKind::kFocal);
  EXPECT_FALSE(parse_loss_kind("hinge").has_value());
}

}  // namespace
}  // namespace cxrlt
