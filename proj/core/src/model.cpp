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

#include "cxrlt/model.hpp"

#include <cmath>

#include <json.hpp>

#include "cxrlt/error.hpp"
#include "cxrlt/positional_encoding.hpp"
#include "cxrlt/random.hpp"

namespace cxrlt {

void ModelConfig::validate() const {
  backbone.validate();
  decoder.validate();
  if (image_size < 1 || image_size % backbone.spatial_stride != 0) {
    throw ConfigError("image_size " + std::to_string(image_size) +
                      " must be a positive multiple of the backbone stride " +
                      std::to_string(backbone.spatial_stride));
  }
  if (positional_encoding && backbone.output_dim() % 2 != 0) {
    throw ConfigError("positional encoding needs an even backbone output dimension");
  }
}

std::string to_json(const ModelConfig& c) {
  nlohmann::json j = {
      {"image_size", c.image_size},
      {"positional_encoding", c.positional_encoding},
      {"backbone",
       {{"kind", to_string(c.backbone.kind)},
        {"widths", c.backbone.widths},
        {"spatial_stride", c.backbone.spatial_stride}}},
      {"decoder",
       {{"num_classes", c.decoder.num_classes},
        {"num_groups", c.decoder.num_groups},
        {"embed_dim", c.decoder.embed_dim},
        {"num_heads", c.decoder.num_heads},
        {"ff_dim", c.decoder.ff_dim},
        {"learnable_queries", c.decoder.learnable_queries}}},
  };
  return j.dump();
}

ModelConfig model_config_from_json(std::string_view json_text) {
  ModelConfig c;
  try {
    const auto j = nlohmann::json::parse(json_text);
    c.image_size = j.value("image_size", c.image_size);
    c.positional_encoding = j.value("positional_encoding", c.positional_encoding);
    if (j.contains("backbone")) {
      const auto& b = j["backbone"];
      const auto kind = parse_backbone_kind(b.value("kind", std::string("tiny_reference")));
      if (!kind) throw ConfigError("unknown backbone kind");
      c.backbone.kind = *kind;
      c.backbone.widths = b.value("widths", c.backbone.widths);
      c.backbone.spatial_stride = b.value("spatial_stride", c.backbone.spatial_stride);
    }
    if (j.contains("decoder")) {
      const auto& d = j["decoder"];
      c.decoder.num_classes = d.value("num_classes", c.decoder.num_classes);
      c.decoder.num_groups = d.value("num_groups", c.decoder.num_groups);
      c.decoder.embed_dim = d.value("embed_dim", c.decoder.embed_dim);
      c.decoder.num_heads = d.value("num_heads", c.decoder.num_heads);
      c.decoder.ff_dim = d.value("ff_dim", c.decoder.ff_dim);
      c.decoder.learnable_queries = d.value("learnable_queries", c.decoder.learnable_queries);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid model config: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<TensorRef> ModelParams::tensors() {
  auto refs = backbone.tensors();
  for (auto& r : decoder.tensors()) refs.push_back(std::move(r));
  return refs;
}

std::vector<ConstTensorRef> ModelParams::tensors() const {
  auto refs = backbone.tensors();
  for (auto& r : decoder.tensors()) refs.push_back(std::move(r));
  return refs;
}

ModelParams zeros_like(const ModelParams& params) {
  return {zeros_like(params.backbone), zeros_like(params.decoder)};
}

Model::Model(ModelConfig config, ModelParams params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  const auto& layers = params_.backbone.layers;
  if (layers.size() != config_.backbone.widths.size()) {
    throw ShapeError("backbone has " + std::to_string(layers.size()) + " layers, config expects " +
                     std::to_string(config_.backbone.widths.size()));
  }
  int in_channels = 1;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const int out = config_.backbone.widths[i];
    if (layers[i].weight.rows() != 9 * in_channels || layers[i].weight.cols() != out ||
        layers[i].bias.cols() != out) {
      throw ShapeError("backbone layer " + std::to_string(i) + " has the wrong shape");
    }
    in_channels = out;
  }
  const auto& d = params_.decoder;
  const int k = config_.decoder.groups();
  const int e = config_.decoder.embed_dim;
  if (d.input_dim() != config_.backbone.output_dim() || d.query.rows() != k ||
      d.query.cols() != e || d.ff1_weight.cols() != config_.decoder.ff_dim ||
      d.group_weight.cols() != config_.decoder.group_size()) {
    throw ShapeError("decoder parameters do not match the model configuration");
  }
}

Model Model::create(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng backbone_rng(mix_seed(seed, 11));
  Rng decoder_rng(mix_seed(seed, 12));
  ModelParams params{init_backbone(config.backbone, backbone_rng),
                     init_ml_decoder(config.decoder, config.backbone.output_dim(), decoder_rng)};
  return Model(config, std::move(params));
}

Tensor Model::logits(const Image& image, ForwardTrace* trace) const {
  ForwardTrace local;
  ForwardTrace& t = trace ? *trace : local;
  t.features = backbone_forward(image, config_.backbone, params_.backbone, &t.backbone);
  if (config_.positional_encoding) {
    return ml_decoder_forward(positional_encode(t.features), params_.decoder, config_.decoder,
                              &t.decoder);
  }
  return ml_decoder_forward(t.features, params_.decoder, config_.decoder, &t.decoder);
}

Tensor Model::logits(const std::vector<Image>& images) const {
  Tensor out(static_cast<Eigen::Index>(images.size()), num_classes());
  for (std::size_t i = 0; i < images.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = logits(images[i]).row(0);
  }
  return out;
}

Tensor Model::backward(const Tensor& grad_logits, const ForwardTrace& trace, ModelParams* grads,
                       bool backbone_grads) const {
  Tensor dfeatures = ml_decoder_backward(grad_logits, params_.decoder, config_.decoder,
                                         trace.decoder, grads ? &grads->decoder : nullptr);
  if (backbone_grads) {
    backbone_backward(dfeatures, config_.backbone, params_.backbone, trace.backbone,
                      grads ? &grads->backbone : nullptr);
  }
  return dfeatures;
}

void Model::reinitialize_decoder(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 12));
  params_.decoder = init_ml_decoder(config_.decoder, config_.backbone.output_dim(), rng);
}

Tensor sigmoid(const Tensor& logits) {
  return logits.unaryExpr([](double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
  });
}

}  // namespace cxrlt
