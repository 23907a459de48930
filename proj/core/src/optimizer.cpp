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

#include "cxrlt/optimizer.hpp"

#include "cxrlt/error.hpp"

namespace cxrlt {

void lion_update(Tensor& param, const Tensor& grad, Tensor& momentum, const LionConfig& config) {
  if (grad.rows() != param.rows() || grad.cols() != param.cols() ||
      momentum.rows() != param.rows() || momentum.cols() != param.cols()) {
    throw ShapeError("Lion: parameter, gradient and momentum shapes differ");
  }
  const double b1 = config.beta1, b2 = config.beta2;
  const double lr = config.learning_rate, wd = config.weight_decay;
  for (Eigen::Index i = 0; i < param.size(); ++i) {
    const double g = grad.data()[i];
    double& m = momentum.data()[i];
    double& p = param.data()[i];
    const double c = b1 * m + (1.0 - b1) * g;
    const double u = c > 0.0 ? 1.0 : (c < 0.0 ? -1.0 : 0.0);
    p = p - lr * (u + wd * p);
    m = b2 * m + (1.0 - b2) * g;
  }
}

void lion_step(const std::vector<TensorRef>& params, const std::vector<ConstTensorRef>& grads,
               OptimizerState& state, const LionConfig& config) {
  if (params.size() != grads.size()) throw ShapeError("Lion: parameter and gradient counts differ");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != grads[i].name) {
      throw ShapeError("Lion: gradient " + grads[i].name + " paired with " + params[i].name);
    }
    Tensor& p = *params[i].tensor;
    auto [it, inserted] = state.momentum.try_emplace(params[i].name);
    if (inserted) it->second = Tensor::Zero(p.rows(), p.cols());
    lion_update(p, *grads[i].tensor, it->second, config);
  }
}

}  // namespace cxrlt
