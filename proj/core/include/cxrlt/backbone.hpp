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

#ifndef CXRLT_BACKBONE_HPP_
#define CXRLT_BACKBONE_HPP_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "cxrlt/random.hpp"
#include "cxrlt/tensor.hpp"

namespace cxrlt {

// Token grid produced by a backbone: `values` is (height * width) x channels,
// row-major over (row, col) cells.
struct FeatureMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  int spatial_stride = 1;
  Tensor values;
};

enum class BackboneKind { kTinyReference, kExternalPretrained };

std::string_view to_string(BackboneKind kind);
std::optional<BackboneKind> parse_backbone_kind(std::string_view text);

// Stack of 3x3 convolutions (padding 1) each followed by GELU. The last
// log2(spatial_stride) stages downsample by 2, earlier stages keep the
// resolution. External backbones share the layout and take their weights
// from a weight manifest.
struct BackboneSpec {
  BackboneKind kind = BackboneKind::kTinyReference;
  std::vector<int> widths = {16, 32, 48, 64};
  int spatial_stride = 16;

  int output_dim() const { return widths.empty() ? 0 : widths.back(); }
  void validate() const;
  bool operator==(const BackboneSpec&) const = default;
};

struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  int stride = 1;
  Tensor weight;  // (9 * in_channels) x out_channels, rows ordered (ky, kx, cin)
  Tensor bias;    // 1 x out_channels
};

struct BackboneParams {
  std::vector<ConvLayer> layers;

  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;
};

BackboneParams init_backbone(const BackboneSpec& spec, Rng& rng);
BackboneParams zeros_like(const BackboneParams& params);

// Per-sample activations kept for the backward pass.
struct BackboneCache {
  std::vector<Tensor> columns;   // im2col input of each layer
  std::vector<Tensor> preact;    // conv output before GELU
  std::vector<int> in_height, in_width;
};

// Throws ShapeError unless both image sides are divisible by the stride.
FeatureMap backbone_forward(const Image& image, const BackboneSpec& spec,
                            const BackboneParams& params, BackboneCache* cache = nullptr);

std::vector<FeatureMap> backbone_forward(const std::vector<Image>& images,
                                         const BackboneSpec& spec,
                                         const BackboneParams& params);

// Accumulates parameter gradients into `grads` (skipped when null) and
// returns d/d(image) when `input_grad` is set, otherwise an empty tensor.
Image backbone_backward(const Tensor& grad_output, const BackboneSpec& spec,
                        const BackboneParams& params, const BackboneCache& cache,
                        BackboneParams* grads, bool input_grad = false);

// Exact GELU and its derivative.
double gelu(double x);
double gelu_grad(double x);

}  // namespace cxrlt

#endif  // CXRLT_BACKBONE_HPP_
