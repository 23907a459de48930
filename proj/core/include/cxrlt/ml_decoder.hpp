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

#ifndef CXRLT_ML_DECODER_HPP_
#define CXRLT_ML_DECODER_HPP_

#include <cstdint>
#include <vector>

#include "cxrlt/backbone.hpp"
#include "cxrlt/random.hpp"
#include "cxrlt/tensor.hpp"

namespace cxrlt {

// Classification head built from a transformer decoder layer without the
// query self-attention. K group queries cross-attend over the feature
// tokens; each group's output vector is mapped by its own projection to
// ceil(C / K) logits and the concatenation is truncated to C.
struct DecoderConfig {
  int num_classes = 19;
  int num_groups = 0;  // 0 selects one query per class
  int embed_dim = 128;
  int num_heads = 8;
  int ff_dim = 256;
  bool learnable_queries = false;

  int groups() const { return num_groups > 0 ? num_groups : num_classes; }
  int group_size() const { return (num_classes + groups() - 1) / groups(); }
  void validate() const;
  bool operator==(const DecoderConfig&) const = default;
};

struct MLDecoderParams {
  Tensor query;                   // K x E
  Tensor input_weight, input_bias;  // D x E, 1 x E
  Tensor q_weight, q_bias, k_weight, k_bias, v_weight, v_bias, out_weight, out_bias;
  Tensor norm1_gain, norm1_bias, norm2_gain, norm2_bias, norm3_gain, norm3_bias;
  Tensor ff1_weight, ff1_bias;    // E x F, 1 x F
  Tensor ff2_weight, ff2_bias;    // F x E, 1 x E
  Tensor group_weight;            // (K * E) x g; rows [kE, (k+1)E) belong to group k
  Tensor group_bias;              // K x g

  int input_dim() const { return static_cast<int>(input_weight.rows()); }
  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;
};

MLDecoderParams init_ml_decoder(const DecoderConfig& config, int input_dim, Rng& rng);
MLDecoderParams zeros_like(const MLDecoderParams& params);

// Multiply-add tally of one forward pass.
struct OpCount {
  std::uint64_t multiply_adds = 0;
};

struct DecoderCache {
  Tensor tokens, embedded;
  Tensor q1, norm1_xhat, norm1_rstd;
  Tensor q_proj, k_proj, v_proj;
  std::vector<Tensor> attention;  // per head, K x T
  Tensor attended;
  Tensor norm2_xhat, norm2_rstd, h1;
  Tensor ff_pre, ff_act;
  Tensor norm3_xhat, norm3_rstd, out;
};

// Returns 1 x C logits. Throws ShapeError if the map's channel count does not
// match the input projection.
Tensor ml_decoder_forward(const FeatureMap& fmap, const MLDecoderParams& params,
                          const DecoderConfig& config, DecoderCache* cache = nullptr,
                          OpCount* ops = nullptr);

// B x C logits for a batch of maps.
Tensor ml_decoder_forward(const std::vector<FeatureMap>& fmaps, const MLDecoderParams& params,
                          const DecoderConfig& config);

// Accumulates parameter gradients into `grads` (skipped when null) and
// returns d/d(tokens), shaped like fmap.values.
Tensor ml_decoder_backward(const Tensor& grad_logits, const MLDecoderParams& params,
                           const DecoderConfig& config, const DecoderCache& cache,
                           MLDecoderParams* grads);

}  // namespace cxrlt

#endif  // CXRLT_ML_DECODER_HPP_
