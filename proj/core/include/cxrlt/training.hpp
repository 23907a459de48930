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

#ifndef CXRLT_TRAINING_HPP_
#define CXRLT_TRAINING_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "cxrlt/augment.hpp"
#include "cxrlt/datakit.hpp"
#include "cxrlt/image_store.hpp"
#include "cxrlt/losses.hpp"
#include "cxrlt/model.hpp"
#include "cxrlt/optimizer.hpp"

namespace cxrlt {

struct TrainConfig {
  double learning_rate = 6e-6;
  double weight_decay = 5e-5;
  int batch_size = 32;
  int epochs = 20;
  double beta1 = 0.9;
  double beta2 = 0.99;
  LossConfig loss;
  std::uint64_t seed = 0;
  // Global class indices the model is trained on; empty means every class.
  std::vector<int> class_subset;
  bool augment = true;
  AugmentPolicy policy = default_policy();
  bool freeze_backbone = false;

  void validate() const;  // throws ConfigError
  LionConfig lion() const { return {learning_rate, weight_decay, beta1, beta2}; }
  bool operator==(const TrainConfig&) const = default;
};

std::string to_json(const TrainConfig& config);
TrainConfig train_config_from_json(std::string_view json_text);

// Sets one field from its textual value, e.g. ("learning_rate", "1e-4") or
// ("loss.kind", "focal"). Throws ConfigError for unknown keys or bad values.
void apply_override(TrainConfig& config, std::string_view key, std::string_view value);

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_map = 0.0;  // NaN when no validation class has a positive
};

struct Checkpoint {
  Model model;
  Branch branch = Branch::kAll;
  std::vector<int> class_indices;        // global index per model output
  std::vector<std::string> class_names;  // the manifest's full class list
  TrainConfig config;
  OptimizerState optimizer;
  int best_epoch = -1;
  std::vector<EpochMetrics> history;
};

// Called after every epoch; used for progress reporting.
using EpochCallback = std::function<void(const EpochMetrics&)>;

// Trains `model` on the training records of `manifest`, restricted to
// config.class_subset. Validation uses `validation` when given, otherwise
// the manifest's val split. Returns the epoch with the best validation mAP
// (the last epoch when mAP is undefined throughout). Throws NumericalError on
// a non-finite loss. Single-threaded and deterministic under config.seed.
Checkpoint train(Model model, const DatasetManifest& manifest, const ImageStore& images,
                 Branch branch, const TrainConfig& config,
                 const DatasetManifest* validation = nullptr, const EpochCallback& on_epoch = {});

// Builds a fresh model for `branch` of the partition and trains it.
Checkpoint train_branch(const ModelConfig& model_config, const DatasetManifest& manifest,
                        const ImageStore& images, const ClassPartition& partition, Branch branch,
                        TrainConfig config, const EpochCallback& on_epoch = {});

// Second cRT stage: one checkpoint per manifest, each starting from the
// checkpoint's backbone (frozen) with a re-initialized decoder.
std::vector<Checkpoint> crt_retrain(const Checkpoint& checkpoint,
                                    const std::vector<DatasetManifest>& manifests,
                                    const ImageStore& images, const TrainConfig& config,
                                    const DatasetManifest* validation = nullptr);

// B x K logits of the model over every record of `manifest`.
Tensor predict_logits(const Model& model, const DatasetManifest& manifest,
                      const ImageStore& images);

// Checkpoint directory: the weight manifest (model tensors plus "opt/"
// momentum) with the configuration in its metadata, and metrics.csv.
void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

std::string format_metrics_csv(const std::vector<EpochMetrics>& history);

}  // namespace cxrlt

#endif  // CXRLT_TRAINING_HPP_
