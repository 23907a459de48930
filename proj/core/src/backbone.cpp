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

#include "cxrlt/backbone.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cxrlt/error.hpp"

namespace cxrlt {
namespace {

int downsampling_stages(int stride) {
  int stages = 0;
  while (stride > 1) {
    stride /= 2;
    ++stages;
  }
  return stages;
}

// Rows are output cells (oy, ox); columns are (ky, kx, cin).
Tensor im2col(const Tensor& input, int height, int width, int channels, int stride) {
  const int out_h = (height - 1) / stride + 1;
  const int out_w = (width - 1) / stride + 1;
  Tensor cols = Tensor::Zero(out_h * out_w, 9 * channels);
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      double* row = cols.row(oy * out_w + ox).data();
      for (int ky = 0; ky < 3; ++ky) {
        const int iy = oy * stride + ky - 1;
        if (iy < 0 || iy >= height) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int ix = ox * stride + kx - 1;
          if (ix < 0 || ix >= width) continue;
          const double* src = input.row(iy * width + ix).data();
          double* dst = row + (ky * 3 + kx) * channels;
          for (int c = 0; c < channels; ++c) dst[c] = src[c];
        }
      }
    }
  }
  return cols;
}

Tensor col2im(const Tensor& cols, int height, int width, int channels, int stride) {
  const int out_h = (height - 1) / stride + 1;
  const int out_w = (width - 1) / stride + 1;
  Tensor input = Tensor::Zero(height * width, channels);
  for (int oy = 0; oy < out_h; ++oy) {
    for (int ox = 0; ox < out_w; ++ox) {
      const double* row = cols.row(oy * out_w + ox).data();
      for (int ky = 0; ky < 3; ++ky) {
        const int iy = oy * stride + ky - 1;
        if (iy < 0 || iy >= height) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int ix = ox * stride + kx - 1;
          if (ix < 0 || ix >= width) continue;
          double* dst = input.row(iy * width + ix).data();
          const double* src = row + (ky * 3 + kx) * channels;
          for (int c = 0; c < channels; ++c) dst[c] += src[c];
        }
      }
    }
  }
  return input;
}

}  // namespace

std::string_view to_string(BackboneKind kind) {
  return kind == BackboneKind::kTinyReference ? "tiny_reference" : "external_pretrained";
}

std::optional<BackboneKind> parse_backbone_kind(std::string_view text) {
  if (text == "tiny_reference") return BackboneKind::kTinyReference;
  if (text == "external_pretrained") return BackboneKind::kExternalPretrained;
  return std::nullopt;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

void BackboneSpec::validate() const {
  if (widths.empty()) throw ConfigError("backbone needs at least one stage");
  for (int w : widths) {
    if (w < 1) throw ConfigError("backbone widths must be >= 1");
  }
  if (spatial_stride < 1 || (spatial_stride & (spatial_stride - 1)) != 0) {
    throw ConfigError("spatial_stride must be a power of two");
  }
  if (downsampling_stages(spatial_stride) > static_cast<int>(widths.size())) {
    throw ConfigError("spatial_stride " + std::to_string(spatial_stride) + " needs more than " +
                      std::to_string(widths.size()) + " stages");
  }
}

std::vector<TensorRef> BackboneParams::tensors() {
  std::vector<TensorRef> refs;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string prefix = "backbone/conv" + std::to_string(i) + "/";
    refs.push_back({prefix + "weight", &layers[i].weight});
    refs.push_back({prefix + "bias", &layers[i].bias});
  }
  return refs;
}

std::vector<ConstTensorRef> BackboneParams::tensors() const {
  std::vector<ConstTensorRef> refs;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string prefix = "backbone/conv" + std::to_string(i) + "/";
    refs.push_back({prefix + "weight", &layers[i].weight});
    refs.push_back({prefix + "bias", &layers[i].bias});
  }
  return refs;
}

BackboneParams init_backbone(const BackboneSpec& spec, Rng& rng) {
  spec.validate();
  const int stages = static_cast<int>(spec.widths.size());
  const int plain = stages - downsampling_stages(spec.spatial_stride);
  BackboneParams params;
  int in_channels = 1;
  for (int i = 0; i < stages; ++i) {
    ConvLayer layer;
    layer.in_channels = in_channels;
    layer.out_channels = spec.widths[static_cast<std::size_t>(i)];
    layer.stride = i < plain ? 1 : 2;
    const double std = std::sqrt(2.0 / (9.0 * in_channels));
    layer.weight.resize(9 * in_channels, layer.out_channels);
    for (Eigen::Index k = 0; k < layer.weight.size(); ++k) layer.weight.data()[k] = rng.normal(0.0, std);
    layer.bias = Tensor::Zero(1, layer.out_channels);
    in_channels = layer.out_channels;
    params.layers.push_back(std::move(layer));
  }
  return params;
}

BackboneParams zeros_like(const BackboneParams& params) {
  BackboneParams out = params;
  for (ConvLayer& l : out.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  return out;
}

FeatureMap backbone_forward(const Image& image, const BackboneSpec& spec,
                            const BackboneParams& params, BackboneCache* cache) {
  const int height = static_cast<int>(image.rows());
  const int width = static_cast<int>(image.cols());
  if (height % spec.spatial_stride != 0 || width % spec.spatial_stride != 0) {
    throw ShapeError("input " + std::to_string(height) + "x" + std::to_string(width) +
                     " is not divisible by spatial stride " + std::to_string(spec.spatial_stride));
  }
  if (params.layers.empty()) throw ShapeError("backbone has no layers");
  if (cache) *cache = BackboneCache{};

  Tensor x = Eigen::Map<const Tensor>(image.data(), height * width, 1);
  int h = height, w = width;
  for (const ConvLayer& layer : params.layers) {
    if (x.cols() != layer.in_channels) throw ShapeError("backbone channel mismatch");
    Tensor cols = im2col(x, h, w, layer.in_channels, layer.stride);
    Tensor pre = cols * layer.weight;
    pre.rowwise() += layer.bias.row(0);
    if (cache) {
      cache->in_height.push_back(h);
      cache->in_width.push_back(w);
    }
    h = (h - 1) / layer.stride + 1;
    w = (w - 1) / layer.stride + 1;
    x = pre.unaryExpr([](double v) { return gelu(v); });
    if (cache) {
      cache->columns.push_back(std::move(cols));
      cache->preact.push_back(std::move(pre));
    }
  }

  FeatureMap out;
  out.height = h;
  out.width = w;
  out.channels = static_cast<int>(x.cols());
  out.spatial_stride = height / h;
  out.values = std::move(x);
  return out;
}

std::vector<FeatureMap> backbone_forward(const std::vector<Image>& images,
                                         const BackboneSpec& spec,
                                         const BackboneParams& params) {
  std::vector<FeatureMap> out;
  out.reserve(images.size());
  for (const Image& image : images) out.push_back(backbone_forward(image, spec, params));
  return out;
}

Image backbone_backward(const Tensor& grad_output, const BackboneSpec& spec,
                        const BackboneParams& params, const BackboneCache& cache,
                        BackboneParams* grads, bool input_grad) {
  (void)spec;
  const std::size_t n = params.layers.size();
  if (cache.preact.size() != n) throw ShapeError("backbone cache does not match parameters");
  Tensor grad = grad_output;
  for (std::size_t i = n; i-- > 0;) {
    const ConvLayer& layer = params.layers[i];
    const Tensor& pre = cache.preact[i];
    if (grad.rows() != pre.rows() || grad.cols() != pre.cols()) {
      throw ShapeError("backbone gradient shape mismatch at layer " + std::to_string(i));
    }
    Tensor dpre = grad.cwiseProduct(pre.unaryExpr([](double v) { return gelu_grad(v); }));
    if (grads) {
      grads->layers[i].weight.noalias() += cache.columns[i].transpose() * dpre;
      grads->layers[i].bias += dpre.colwise().sum();
    }
    if (i == 0 && !input_grad) return Image();
    Tensor dcols = dpre * layer.weight.transpose();
    grad = col2im(dcols, cache.in_height[i], cache.in_width[i], layer.in_channels, layer.stride);
  }
  return Eigen::Map<const Image>(grad.data(), cache.in_height[0], cache.in_width[0]);
}

}  // namespace cxrlt
