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

#ifndef CXRLT_MODEL_HPP_
#define CXRLT_MODEL_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cxrlt/backbone.hpp"
#include "cxrlt/ml_decoder.hpp"
#include "cxrlt/tensor.hpp"

namespace cxrlt {

// backbone -> (optional) 2-D positional encoding -> ML-Decoder head.
struct ModelConfig {
  int image_size = 64;
  BackboneSpec backbone;
  DecoderConfig decoder;
  bool positional_encoding = true;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

std::string to_json(const ModelConfig& config);
ModelConfig model_config_from_json(std::string_view json_text);

struct ModelParams {
  BackboneParams backbone;
  MLDecoderParams decoder;

  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;
};

ModelParams zeros_like(const ModelParams& params);

struct ForwardTrace {
  BackboneCache backbone;
  FeatureMap features;  // backbone output, before positional encoding
  DecoderCache decoder;
};

class Model {
 public:
  Model() = default;
  // Throws ShapeError when the parameters do not fit the configuration.
  Model(ModelConfig config, ModelParams params);

  static Model create(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const ModelParams& params() const { return params_; }
  ModelParams& params() { return params_; }
  int num_classes() const { return config_.decoder.num_classes; }

  // 1 x C logits.
  Tensor logits(const Image& image, ForwardTrace* trace = nullptr) const;
  // B x C logits.
  Tensor logits(const std::vector<Image>& images) const;

  // Backpropagates d(loss)/d(logits) of a traced sample. Returns the
  // gradient with respect to the backbone feature map.
  Tensor backward(const Tensor& grad_logits, const ForwardTrace& trace, ModelParams* grads,
                  bool backbone_grads = true) const;

  // Fresh decoder weights; the backbone is untouched.
  void reinitialize_decoder(std::uint64_t seed);

 private:
  ModelConfig config_;
  ModelParams params_;
};

Tensor sigmoid(const Tensor& logits);

}  // namespace cxrlt

#endif  // CXRLT_MODEL_HPP_
