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

#include "cxrlt/gradcam.hpp"

#include <algorithm>
#include <string>

#include "cxrlt/augment.hpp"
#include "cxrlt/error.hpp"

namespace cxrlt {

Image gradcam_from_activations(const FeatureMap& activations, const Tensor& gradients, int rows,
                               int cols) {
  if (gradients.rows() != activations.values.rows() ||
      gradients.cols() != activations.values.cols()) {
    throw ShapeError("Grad-CAM gradients do not match the activations");
  }
  const Eigen::RowVectorXd weights = gradients.colwise().mean();
  const Eigen::VectorXd cam = (activations.values * weights.transpose()).cwiseMax(0.0);
  Image coarse = Eigen::Map<const Image>(cam.data(), activations.height, activations.width);
  Image heat = resize_bilinear(coarse, rows, cols).cwiseMax(0.0);
  const double peak = heat.maxCoeff();
  if (peak > 0.0) heat /= peak;
  return heat;
}

Image gradcam(const Model& model, const Image& image, int class_index) {
  if (class_index < 0 || class_index >= model.num_classes()) {
    throw ConfigError("class index " + std::to_string(class_index) + " out of range [0, " +
                      std::to_string(model.num_classes()) + ")");
  }
  ForwardTrace trace;
  model.logits(image, &trace);
  Tensor onehot = Tensor::Zero(1, model.num_classes());
  onehot(0, class_index) = 1.0;
  const Tensor grads = model.backward(onehot, trace, nullptr, false);
  return gradcam_from_activations(trace.features, grads, static_cast<int>(image.rows()),
                                  static_cast<int>(image.cols()));
}

}  // namespace cxrlt
