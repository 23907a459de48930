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

#include "cxrlt/ensemble.hpp"

#include <gtest/gtest.h>

#include <filesystem>

#include "cxrlt/error.hpp"
#include "oracles.hpp"

namespace cxrlt {
namespace {

// Classes 0..4; support device 0; head {0,1,2}, tail {0,3,4}.
ClassPartition partition() {
  ClassPartition p;
  p.head_indices = {0, 1, 2};
  p.tail_indices = {0, 3, 4};
  p.all_indices = {0, 1, 2, 3, 4};
  p.support_device_index = 0;
  return p;
}

BranchPrediction make(Branch b, const std::vector<int>& classes, Rng& rng, int n) {
  BranchPrediction pred;
  pred.branch = b;
  pred.class_indices = classes;
  pred.scores.resize(n, static_cast<Eigen::Index>(classes.size()));
  for (Eigen::Index i = 0; i < pred.scores.size(); ++i) pred.scores.data()[i] = rng.uniform();
  return pred;
}

TEST(Combine, Arithmetic) {
  const ClassPartition p = partition();
  Rng rng(1);
  BranchPrediction all = make(Branch::kAll, p.all_indices, rng, 1);
  BranchPrediction head = make(Branch::kHead, p.head_indices, rng, 1);
  BranchPrediction tail = make(Branch::kTail, p.tail_indices, rng, 1);
  all.scores(0, 1) = 0.4;
  head.scores(0, 1) = 0.6;
  all.scores(0, 0) = 0.3;
  head.scores(0, 0) = 0.6;
  tail.scores(0, 0) = 0.9;
  const ScoreMatrix out = combine(all, head, tail, p);
  EXPECT_DOUBLE_EQ(out.values(0, 1), 0.5);
  EXPECT_NEAR(out.values(0, 0), 0.6, 1e-15);
  EXPECT_DOUBLE_EQ(out.values(0, 3), (all.scores(0, 3) + tail.scores(0, 1)) / 2);
}

TEST(Combine, AgreeingBranchesAreIdentity) {
  const ClassPartition p = partition();
  Rng rng(2);
  const BranchPrediction all = make(Branch::kAll, p.all_indices, rng, 30);
  const ScoreMatrix out = combine(all, all, all, p);
  EXPECT_EQ(out.values, all.scores);
}

TEST(Combine, ConvexAndPermutationEquivariant) {
  const ClassPartition p = partition();
  Rng rng(3);
  const auto all = make(Branch::kAll, p.all_indices, rng, 12);
  const auto head = make(Branch::kHead, p.head_indices, rng, 12);
  const auto tail = make(Branch::kTail, p.tail_indices, rng, 12);
  const ScoreMatrix out = combine(all, head, tail, p);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(12);
  perm.setIdentity();
  std::vector<int> order(12);
  for (int i = 0; i < 12; ++i) order[static_cast<std::size_t>(i)] = (i * 5) % 12;
  for (int i = 0; i < 12; ++i) perm.indices()[i] = order[static_cast<std::size_t>(i)];
  auto permuted = [&](BranchPrediction b) {
    b.scores = perm * b.scores;
    return b;
  };
  const ScoreMatrix shuffled = combine(permuted(all), permuted(head), permuted(tail), p);
  EXPECT_EQ(shuffled.values, perm * out.values);
}

TEST(Combine, Errors) {
  const ClassPartition p = partition();
  Rng rng(4);
  const auto all = make(Branch::kAll, p.all_indices, rng, 5);
  const auto head = make(Branch::kHead, p.head_indices, rng, 5);
  const auto short_tail = make(Branch::kTail, p.tail_indices, rng, 4);
  EXPECT_THROW(combine(all, head, short_tail, p), ShapeError);
  const auto bad_tail = make(Branch::kTail, {0, 3}, rng, 5);
  EXPECT_THROW(combine(all, head, bad_tail, p), ConfigError);
  auto named_head = head;
  auto named_all = all;
  named_all.sample_ids = {"a", "b", "c", "d", "e"};
  named_head.sample_ids = {"a", "b", "c", "d", "x"};
  EXPECT_THROW(combine(named_all, named_head, make(Branch::kTail, p.tail_indices, rng, 5), p), ShapeError);
}

TEST(BranchCsv, RoundTrip) {
  const ClassPartition p = partition();
  Rng rng(5);
  auto pred = make(Branch::kTail, p.tail_indices, rng, 3);
  pred.sample_ids = {"s1", "s2", "s3"};
  const std::vector<std::string> names{"Support Devices", "b", "c", "d", "e"};
  const auto path = std::filesystem::temp_directory_path() / "cxrlt_branch.csv";
  save_branch_prediction(path, pred, names);
  const BranchPrediction back = load_branch_prediction(path, names, Branch::kTail);
  EXPECT_EQ(back.class_indices, pred.class_indices);
  EXPECT_EQ(back.sample_ids, pred.sample_ids);
  EXPECT_EQ(back.scores, pred.scores);
  EXPECT_THROW(load_branch_prediction(path, {"x"}, Branch::kTail), ConfigError);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace cxrlt
