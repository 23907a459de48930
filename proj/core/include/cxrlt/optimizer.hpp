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

#ifndef CXRLT_OPTIMIZER_HPP_
#define CXRLT_OPTIMIZER_HPP_

#include <map>
#include <string>
#include <vector>

#include "cxrlt/tensor.hpp"

namespace cxrlt {

struct LionConfig {
  double learning_rate = 6e-6;
  double weight_decay = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.99;
};

// Momentum per parameter tensor, keyed by tensor name. Entries are created
// as zeros on first use.
struct OptimizerState {
  std::map<std::string, Tensor> momentum;
};

// Lion update of one tensor:
//   u  = sign(beta1 m + (1 - beta1) g)    with sign(0) = 0
//   p' = p - lr (u + wd p)
//   m' = beta2 m + (1 - beta2) g
void lion_update(Tensor& param, const Tensor& grad, Tensor& momentum, const LionConfig& config);

// Applies lion_update to every (param, grad) pair, matched by position.
// Names must agree and shapes must match; otherwise ShapeError.
void lion_step(const std::vector<TensorRef>& params, const std::vector<ConstTensorRef>& grads,
               OptimizerState& state, const LionConfig& config);

}  // namespace cxrlt

#endif  // CXRLT_OPTIMIZER_HPP_
