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

#include "cxrlt/training.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cxrlt/error.hpp"
#include "cxrlt/imbalance.hpp"
#include "cxrlt/synth.hpp"

namespace cxrlt {
namespace {

ModelConfig tiny_model(int image_size) {
  ModelConfig c;
  c.image_size = image_size;
  c.backbone.widths = {4, 8};
  c.backbone.spatial_stride = 4;
  c.decoder.embed_dim = 16;
  c.decoder.num_heads = 2;
  c.decoder.ff_dim = 16;
  return c;
}

SyntheticDataset small_data(int samples, int classes, std::uint64_t seed = 1) {
  SynthConfig c;
  c.num_samples = samples;
  c.num_classes = classes;
  c.image_size = 16;
  c.seed = seed;
  return generate_synthetic(c);
}

TrainConfig quick_config() {
  TrainConfig t;
  t.learning_rate = 1e-3;
  t.epochs = 2;
  t.batch_size = 8;
  t.seed = 3;
  return t;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

ClassPartition partition_of(const DatasetManifest& m) {
  return partition_classes(class_counts(m, Split::kTrain), m.class_names(), kSupportDeviceName);
}

TEST(TrainConfig, JsonAndOverrides) {
  TrainConfig c = quick_config();
  c.loss.kind = LossKind::kFocal;
  c.loss.alpha = {0.2, 0.4};
  c.class_subset = {0, 2};
  EXPECT_EQ(train_config_from_json(to_json(c)), c);
  apply_override(c, "learning_rate", "2e-4");
  apply_override(c, "loss.kind", "weighted_bce");
  apply_override(c, "augment", "false");
  apply_override(c, "class_subset", "1,3");
  EXPECT_DOUBLE_EQ(c.learning_rate, 2e-4);
  EXPECT_EQ(c.loss.kind, LossKind::kWeightedBce);
  EXPECT_FALSE(c.augment);
  EXPECT_EQ(c.class_subset, (std::vector<int>{1, 3}));
  EXPECT_THROW(apply_override(c, "learning_rate", "-1"), ConfigError);
  EXPECT_THROW(apply_override(c, "batch_size", "x"), ConfigError);
  EXPECT_THROW(apply_override(c, "colour", "red"), ConfigError);
  EXPECT_THROW(train_config_from_json(R"({"batch_size": 0})"), ConfigError);
}

TEST(Train, HistoryAndBranchWidths) {
  const SyntheticDataset d = small_data(400, 19);
  const ClassPartition p = partition_of(d.manifest);
  TrainConfig t = quick_config();
  t.epochs = 1;
  const Checkpoint head = train_branch(tiny_model(16), d.manifest, d.images, p, Branch::kHead, t);
  EXPECT_EQ(head.model.num_classes(), 9);
  EXPECT_EQ(head.class_indices, p.head_indices);
  EXPECT_EQ(head.history.size(), 1u);
  EXPECT_TRUE(std::isfinite(head.history[0].train_loss));
  const Checkpoint tail = train_branch(tiny_model(16), d.manifest, d.images, p, Branch::kTail, t);
  EXPECT_EQ(tail.model.num_classes(), 11);
}

TEST(Train, DeterministicUnderSeed) {
  const SyntheticDataset d = small_data(80, 3);
  const ClassPartition p = partition_of(d.manifest);
  const Checkpoint a = train_branch(tiny_model(16), d.manifest, d.images, p, Branch::kAll, quick_config());
  const Checkpoint b = train_branch(tiny_model(16), d.manifest, d.images, p, Branch::kAll, quick_config());
  const auto ta = a.model.params().tensors();
  const auto tb = b.model.params().tensors();
  for (std::size_t k = 0; k < ta.size(); ++k) EXPECT_EQ(*ta[k].tensor, *tb[k].tensor) << ta[k].name;
  EXPECT_EQ(format_metrics_csv(a.history), format_metrics_csv(b.history));
}

TEST(Train, OverfitsTinySet) {
  const SyntheticDataset d = small_data(200, 3);
  std::vector<Record> ten;
  const DatasetManifest train_split = d.manifest.select(Split::kTrain);
  for (const Record& r : train_split.records()) {
    if (ten.size() < 10) ten.push_back(r);
  }
  const DatasetManifest tiny(d.manifest.class_names(), ten);
  TrainConfig t = quick_config();
  t.augment = false;
  t.batch_size = 10;
  t.epochs = 200;
  t.weight_decay = 0.0;
  t.learning_rate = 3e-3;
  const Checkpoint ck = train(Model::create([] { auto c = tiny_model(16); c.decoder.num_classes = 3; return c; }(),
                                            5),
                              tiny, d.images, Branch::kAll, t);
  EXPECT_LT(ck.history.back().train_loss, 0.05);
}

TEST(Train, OneBatchLossDecreasesEarly) {
  int passed = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SyntheticDataset d = small_data(60, 3, seed + 10);
    std::vector<Record> batch;
    const DatasetManifest train_split = d.manifest.select(Split::kTrain);
    for (const Record& r : train_split.records()) {
      if (batch.size() < 8) batch.push_back(r);
    }
    const DatasetManifest one(d.manifest.class_names(), batch);
    TrainConfig t = quick_config();
    t.augment = false;
    t.batch_size = 8;
    t.epochs = 5;
    t.seed = seed;
    ModelConfig mc = tiny_model(16);
    mc.decoder.num_classes = 3;
    const Checkpoint ck = train(Model::create(mc, seed), one, d.images, Branch::kAll, t);
    bool monotone = true;
    for (std::size_t k = 1; k < ck.history.size(); ++k) {
      monotone = monotone && ck.history[k].train_loss <= ck.history[k - 1].train_loss;
    }
    passed += monotone;
  }
  EXPECT_GE(passed, 4);
}

TEST(Train, NonFiniteLossAborts) {
  const SyntheticDataset d = small_data(60, 3);
  TrainConfig t = quick_config();
  t.learning_rate = 1e300;
  t.epochs = 3;
  ModelConfig mc = tiny_model(16);
  mc.decoder.num_classes = 3;
  try {
    train(Model::create(mc, 1), d.manifest, d.images, Branch::kAll, t);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("epoch"), std::string::npos);
    EXPECT_NE(what.find("batch"), std::string::npos);
    EXPECT_NE(what.find("bce"), std::string::npos);
  }
}

TEST(Train, RejectsWidthMismatch) {
  const SyntheticDataset d = small_data(60, 3);
  ModelConfig mc = tiny_model(16);
  mc.decoder.num_classes = 2;
  EXPECT_THROW(train(Model::create(mc, 1), d.manifest, d.images, Branch::kAll, quick_config()), ShapeError);
}

TEST(Checkpoint, SaveLoadSaveIsBitIdentical) {
  const SyntheticDataset d = small_data(60, 3);
  const ClassPartition p = partition_of(d.manifest);
  const Checkpoint ck = train_branch(tiny_model(16), d.manifest, d.images, p, Branch::kTail, quick_config());
  const auto dir = std::filesystem::temp_directory_path() / "cxrlt_ckpt_test";
  std::filesystem::remove_all(dir);
  save_checkpoint(dir / "a", ck);
  const Checkpoint back = load_checkpoint(dir / "a");
  EXPECT_EQ(back.branch, Branch::kTail);
  EXPECT_EQ(back.class_indices, ck.class_indices);
  EXPECT_EQ(back.config, ck.config);
  EXPECT_EQ(back.optimizer.momentum.size(), ck.optimizer.momentum.size());
  save_checkpoint(dir / "b", back);
  for (const char* f : {"weights.bin", "index.json", "metrics.csv"}) {
    EXPECT_EQ(read_file(dir / "a" / f), read_file(dir / "b" / f)) << f;
  }
  EXPECT_THROW(load_checkpoint(dir / "missing"), IoError);
  std::filesystem::remove_all(dir);
}

TEST(Crt, RetrainFreezesBackboneAndMovesHead) {
  const SyntheticDataset d = small_data(120, 3);
  const ClassPartition p = partition_of(d.manifest);
  const Checkpoint base = train_branch(tiny_model(16), d.manifest, d.images, p, Branch::kAll, quick_config());
  std::vector<DatasetManifest> sets;
  for (std::uint64_t s = 0; s < 2; ++s) sets.push_back(crt_resample(d.manifest, 0.7, s));
  const auto out = crt_retrain(base, sets, d.images, quick_config(), &d.manifest);
  ASSERT_EQ(out.size(), 2u);
  const auto before = base.model.params().backbone.tensors();
  for (const Checkpoint& ck : out) {
    const auto after = ck.model.params().backbone.tensors();
    for (std::size_t k = 0; k < before.size(); ++k) EXPECT_EQ(*after[k].tensor, *before[k].tensor);
    EXPECT_NE(ck.model.params().decoder.group_weight, base.model.params().decoder.group_weight);
    EXPECT_TRUE(ck.config.freeze_backbone);
  }
  EXPECT_THROW(crt_retrain(base, {}, d.images, quick_config()), ConfigError);
}

}  // namespace
}  // namespace cxrlt
