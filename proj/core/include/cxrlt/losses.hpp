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

#ifndef CXRLT_LOSSES_HPP_
#define CXRLT_LOSSES_HPP_

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cxrlt/datakit.hpp"
#include "cxrlt/tensor.hpp"

namespace cxrlt {

enum class LossKind { kBce, kWeightedBce, kFocal };

std::string_view to_string(LossKind kind);
std::optional<LossKind> parse_loss_kind(std::string_view text);

struct LossConfig {
  LossKind kind = LossKind::kBce;
  std::vector<double> pos_weights;  // weighted_bce; one per class, > 0
  std::vector<double> alpha;        // focal; one per class in (0, 1], empty -> 0.5
  double gamma = 2.0;               // focal

  // Throws ConfigError. `num_classes` checks vector lengths when non-empty.
  void validate(int num_classes) const;
  bool operator==(const LossConfig&) const = default;
};

// Mean loss over all B x C cells and its gradient with respect to the logits.
struct LossValue {
  double value = 0.0;
  Tensor grad;
};

// All losses use the log-sum-exp form and stay finite for large |logit|.
// Labels are 0/1 stored as doubles. Shape mismatches throw ShapeError.
LossValue bce(const Tensor& logits, const Tensor& labels);
LossValue weighted_bce(const Tensor& logits, const Tensor& labels,
                       std::span<const double> pos_weights);
LossValue focal_loss(const Tensor& logits, const Tensor& labels, std::span<const double> alpha,
                     double gamma);
LossValue evaluate_loss(const LossConfig& config, const Tensor& logits, const Tensor& labels);

// w[c] = negatives / positives. Throws ConfigError naming a class with no
// positives.
std::vector<double> compute_pos_weights(const LabelMatrix& labels);

// alpha[c] proportional to 1 - AP[c], rescaled to mean 0.5 and clipped to
// [0.01, 1]. Weaker classes get larger alpha.
std::vector<double> focal_alpha_from_ap(std::span<const double> average_precision);

}  // namespace cxrlt

#endif  // CXRLT_LOSSES_HPP_
