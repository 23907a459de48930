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

#ifndef CXRLT_GRADCAM_HPP_
#define CXRLT_GRADCAM_HPP_

#include "cxrlt/backbone.hpp"
#include "cxrlt/model.hpp"

namespace cxrlt {

// Class activation map from a target layer's activations and the gradient of
// one class logit with respect to them (both (h * w) x D). Channel weights are
// the spatial mean of the gradient; the weighted channel sum is rectified,
// bilinearly upsampled to rows x cols and divided by its maximum. An all-zero
// map stays all zero.
Image gradcam_from_activations(const FeatureMap& activations, const Tensor& gradients, int rows,
                               int cols);

// Grad-CAM of `class_index` on the backbone's final feature map. Throws
// ConfigError when the class is out of range.
Image gradcam(const Model& model, const Image& image, int class_index);

}  // namespace cxrlt

#endif  // CXRLT_GRADCAM_HPP_
