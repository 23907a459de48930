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

#include "cxrlt/ml_decoder.hpp"

#include <cmath>
#include <string>

#include "cxrlt/error.hpp"

namespace cxrlt {
namespace {

constexpr double kNormEps = 1e-5;

Tensor random_normal(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  Tensor t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.normal(0.0, stddev);
  return t;
}

Tensor xavier(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  return random_normal(fan_in, fan_out,
                       std::sqrt(2.0 / static_cast<double>(fan_in + fan_out)), rng);
}

// Row-wise layer norm; xhat and rstd are kept for the backward pass.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, Tensor& xhat,
                  Tensor& rstd) {
  const Eigen::Index n = x.cols();
  xhat.resize(x.rows(), n);
  rstd.resize(x.rows(), 1);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().sum() / static_cast<double>(n);
    const double s = 1.0 / std::sqrt(var + kNormEps);
    rstd(r, 0) = s;
    xhat.row(r) = (x.row(r).array() - mean) * s;
  }
  Tensor y = xhat.array().rowwise() * gain.row(0).array();
  y.rowwise() += bias.row(0);
  return y;
}

Tensor layer_norm_backward(const Tensor& dy, const Tensor& gain, const Tensor& xhat,
                           const Tensor& rstd, Tensor* dgain, Tensor* dbias) {
  if (dgain) *dgain += dy.cwiseProduct(xhat).colwise().sum();
  if (dbias) *dbias += dy.colwise().sum();
  const double n = static_cast<double>(dy.cols());
  Tensor dxhat = dy.array().rowwise() * gain.row(0).array();
  Tensor dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_d = dxhat.row(r).sum() / n;
    const double mean_dx = dxhat.row(r).dot(xhat.row(r)) / n;
    dx.row(r) = rstd(r, 0) * (dxhat.row(r).array() - mean_d - xhat.row(r).array() * mean_dx);
  }
  return dx;
}

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b, OpCount* ops) {
  if (ops) ops->multiply_adds += static_cast<std::uint64_t>(x.rows() * x.cols() * w.cols());
  Tensor y = x * w;
  y.rowwise() += b.row(0);
  return y;
}

template <typename Self, typename Ref>
std::vector<Ref> decoder_refs(Self& p) {
  return {
      {"decoder/query", &p.query},
      {"decoder/input_proj/weight", &p.input_weight},
      {"decoder/input_proj/bias", &p.input_bias},
      {"decoder/attn/q_weight", &p.q_weight},
      {"decoder/attn/q_bias", &p.q_bias},
      {"decoder/attn/k_weight", &p.k_weight},
      {"decoder/attn/k_bias", &p.k_bias},
      {"decoder/attn/v_weight", &p.v_weight},
      {"decoder/attn/v_bias", &p.v_bias},
      {"decoder/attn/out_weight", &p.out_weight},
      {"decoder/attn/out_bias", &p.out_bias},
      {"decoder/norm1/gain", &p.norm1_gain},
      {"decoder/norm1/bias", &p.norm1_bias},
      {"decoder/norm2/gain", &p.norm2_gain},
      {"decoder/norm2/bias", &p.norm2_bias},
      {"decoder/norm3/gain", &p.norm3_gain},
      {"decoder/norm3/bias", &p.norm3_bias},
      {"decoder/ff1/weight", &p.ff1_weight},
      {"decoder/ff1/bias", &p.ff1_bias},
      {"decoder/ff2/weight", &p.ff2_weight},
      {"decoder/ff2/bias", &p.ff2_bias},
      {"decoder/group/weight", &p.group_weight},
      {"decoder/group/bias", &p.group_bias},
  };
}

}  // namespace

void DecoderConfig::validate() const {
  if (num_classes < 1) throw ConfigError("decoder needs at least one class");
  if (num_groups < 0) throw ConfigError("num_groups must be >= 0");
  if (groups() > num_classes) throw ConfigError("num_groups must not exceed num_classes");
  if (embed_dim < 1 || num_heads < 1 || ff_dim < 1) {
    throw ConfigError("decoder dimensions must be positive");
  }
  if (embed_dim % num_heads != 0) {
    throw ConfigError("num_heads " + std::to_string(num_heads) + " does not divide embed_dim " +
                      std::to_string(embed_dim));
  }
}

std::vector<TensorRef> MLDecoderParams::tensors() { return decoder_refs<MLDecoderParams, TensorRef>(*this); }

std::vector<ConstTensorRef> MLDecoderParams::tensors() const {
  return decoder_refs<const MLDecoderParams, ConstTensorRef>(*this);
}

MLDecoderParams init_ml_decoder(const DecoderConfig& config, int input_dim, Rng& rng) {
  config.validate();
  if (input_dim < 1) throw ConfigError("decoder input_dim must be >= 1");
  const int k = config.groups();
  const int e = config.embed_dim;
  const int f = config.ff_dim;
  const int g = config.group_size();
  MLDecoderParams p;
  p.query = random_normal(k, e, 1.0, rng);
  p.input_weight = xavier(input_dim, e, rng);
  p.input_bias = Tensor::Zero(1, e);
  p.q_weight = xavier(e, e, rng);
  p.q_bias = Tensor::Zero(1, e);
  p.k_weight = xavier(e, e, rng);
  p.k_bias = Tensor::Zero(1, e);
  p.v_weight = xavier(e, e, rng);
  p.v_bias = Tensor::Zero(1, e);
  p.out_weight = xavier(e, e, rng);
  p.out_bias = Tensor::Zero(1, e);
  for (Tensor* gain : {&p.norm1_gain, &p.norm2_gain, &p.norm3_gain}) *gain = Tensor::Ones(1, e);
  for (Tensor* bias : {&p.norm1_bias, &p.norm2_bias, &p.norm3_bias}) *bias = Tensor::Zero(1, e);
  p.ff1_weight = xavier(e, f, rng);
  p.ff1_bias = Tensor::Zero(1, f);
  p.ff2_weight = xavier(f, e, rng);
  p.ff2_bias = Tensor::Zero(1, e);
  p.group_weight = random_normal(static_cast<Eigen::Index>(k) * e, g,
                                 std::sqrt(2.0 / static_cast<double>(e + g)), rng);
  p.group_bias = Tensor::Zero(k, g);
  return p;
}

MLDecoderParams zeros_like(const MLDecoderParams& params) {
  MLDecoderParams out = params;
  for (TensorRef& ref : out.tensors()) ref.tensor->setZero();
  return out;
}

Tensor ml_decoder_forward(const FeatureMap& fmap, const MLDecoderParams& p,
                          const DecoderConfig& config, DecoderCache* cache, OpCount* ops) {
  if (fmap.channels != p.input_dim() || fmap.values.cols() != p.input_dim()) {
    throw ShapeError("feature map has " + std::to_string(fmap.channels) +
                     " channels, decoder expects " + std::to_string(p.input_dim()));
  }
  const int k = config.groups();
  const int e = config.embed_dim;
  const int g = config.group_size();
  const int heads = config.num_heads;
  const int dh = e / heads;
  if (p.query.rows() != k || p.query.cols() != e || p.group_weight.rows() != k * e ||
      p.group_weight.cols() != g) {
    throw ShapeError("decoder parameters do not match the decoder configuration");
  }
  DecoderCache local;
  DecoderCache& c = cache ? *cache : local;

  c.tokens = fmap.values;
  c.embedded = affine(c.tokens, p.input_weight, p.input_bias, ops);
  c.q1 = layer_norm(p.query, p.norm1_gain, p.norm1_bias, c.norm1_xhat, c.norm1_rstd);
  c.q_proj = affine(c.q1, p.q_weight, p.q_bias, ops);
  c.k_proj = affine(c.embedded, p.k_weight, p.k_bias, ops);
  c.v_proj = affine(c.embedded, p.v_weight, p.v_bias, ops);

  const Eigen::Index t = c.embedded.rows();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  c.attention.assign(static_cast<std::size_t>(heads), Tensor());
  Tensor attended(k, e);
  for (int h = 0; h < heads; ++h) {
    Tensor scores = c.q_proj.middleCols(h * dh, dh) * c.k_proj.middleCols(h * dh, dh).transpose();
    scores *= scale;
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
      const double m = scores.row(r).maxCoeff();
      scores.row(r) = (scores.row(r).array() - m).exp();
      scores.row(r) /= scores.row(r).sum();
    }
    attended.middleCols(h * dh, dh) = scores * c.v_proj.middleCols(h * dh, dh);
    if (ops) ops->multiply_adds += static_cast<std::uint64_t>(2 * k * t * dh);
    c.attention[static_cast<std::size_t>(h)] = std::move(scores);
  }
  c.attended = std::move(attended);

  Tensor residual = c.q1 + affine(c.attended, p.out_weight, p.out_bias, ops);
  c.h1 = layer_norm(residual, p.norm2_gain, p.norm2_bias, c.norm2_xhat, c.norm2_rstd);
  c.ff_pre = affine(c.h1, p.ff1_weight, p.ff1_bias, ops);
  c.ff_act = c.ff_pre.unaryExpr([](double v) { return gelu(v); });
  residual = c.h1 + affine(c.ff_act, p.ff2_weight, p.ff2_bias, ops);
  c.out = layer_norm(residual, p.norm3_gain, p.norm3_bias, c.norm3_xhat, c.norm3_rstd);

  Tensor logits(1, config.num_classes);
  for (int q = 0; q < k; ++q) {
    const Eigen::RowVectorXd group = c.out.row(q) * p.group_weight.middleRows(q * e, e) + p.group_bias.row(q);
    for (int j = 0; j < g; ++j) {
      const int cls = q * g + j;
      if (cls < config.num_classes) logits(0, cls) = group(j);
    }
  }
  if (ops) ops->multiply_adds += static_cast<std::uint64_t>(k * e * g);
  return logits;
}

Tensor ml_decoder_forward(const std::vector<FeatureMap>& fmaps, const MLDecoderParams& params,
                          const DecoderConfig& config) {
  Tensor logits(static_cast<Eigen::Index>(fmaps.size()), config.num_classes);
  for (std::size_t i = 0; i < fmaps.size(); ++i) {
    logits.row(static_cast<Eigen::Index>(i)) = ml_decoder_forward(fmaps[i], params, config).row(0);
  }
  return logits;
}

Tensor ml_decoder_backward(const Tensor& grad_logits, const MLDecoderParams& p,
                           const DecoderConfig& config, const DecoderCache& c,
                           MLDecoderParams* grads) {
  if (grad_logits.rows() != 1 || grad_logits.cols() != config.num_classes) {
    throw ShapeError("logit gradient must be 1 x " + std::to_string(config.num_classes));
  }
  const int k = config.groups();
  const int e = config.embed_dim;
  const int g = config.group_size();
  const int heads = config.num_heads;
  const int dh = e / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // Group projections; the truncated logits receive zero gradient.
  Tensor dout(k, e);
  for (int q = 0; q < k; ++q) {
    Eigen::RowVectorXd dgroup = Eigen::RowVectorXd::Zero(g);
    for (int j = 0; j < g; ++j) {
      const int cls = q * g + j;
      if (cls < config.num_classes) dgroup(j) = grad_logits(0, cls);
    }
    dout.row(q) = dgroup * p.group_weight.middleRows(q * e, e).transpose();
    if (grads) {
      grads->group_weight.middleRows(q * e, e).noalias() += c.out.row(q).transpose() * dgroup;
      grads->group_bias.row(q) += dgroup;
    }
  }

  Tensor dres3 = layer_norm_backward(dout, p.norm3_gain, c.norm3_xhat, c.norm3_rstd,
                                     grads ? &grads->norm3_gain : nullptr,
                                     grads ? &grads->norm3_bias : nullptr);
  Tensor dh1 = dres3;
  if (grads) {
    grads->ff2_weight.noalias() += c.ff_act.transpose() * dres3;
    grads->ff2_bias += dres3.colwise().sum();
  }
  Tensor dpre = (dres3 * p.ff2_weight.transpose())
                    .cwiseProduct(c.ff_pre.unaryExpr([](double v) { return gelu_grad(v); }));
  if (grads) {
    grads->ff1_weight.noalias() += c.h1.transpose() * dpre;
    grads->ff1_bias += dpre.colwise().sum();
  }
  dh1.noalias() += dpre * p.ff1_weight.transpose();

  Tensor dres2 = layer_norm_backward(dh1, p.norm2_gain, c.norm2_xhat, c.norm2_rstd,
                                     grads ? &grads->norm2_gain : nullptr,
                                     grads ? &grads->norm2_bias : nullptr);
  Tensor dq1 = dres2;
  if (grads) {
    grads->out_weight.noalias() += c.attended.transpose() * dres2;
    grads->out_bias += dres2.colwise().sum();
  }
  const Tensor dattended = dres2 * p.out_weight.transpose();

  Tensor dq_proj(k, e), dk_proj(c.k_proj.rows(), e), dv_proj(c.v_proj.rows(), e);
  for (int h = 0; h < heads; ++h) {
    const Tensor& attn = c.attention[static_cast<std::size_t>(h)];
    const auto d_o = dattended.middleCols(h * dh, dh);
    Tensor dattn = d_o * c.v_proj.middleCols(h * dh, dh).transpose();
    dv_proj.middleCols(h * dh, dh) = attn.transpose() * d_o;
    // Softmax backward, row by row.
    Tensor dscores(attn.rows(), attn.cols());
    for (Eigen::Index r = 0; r < attn.rows(); ++r) {
      const double dot = attn.row(r).dot(dattn.row(r));
      dscores.row(r) = attn.row(r).array() * (dattn.row(r).array() - dot);
    }
    dscores *= scale;
    dq_proj.middleCols(h * dh, dh) = dscores * c.k_proj.middleCols(h * dh, dh);
    dk_proj.middleCols(h * dh, dh) = dscores.transpose() * c.q_proj.middleCols(h * dh, dh);
  }

  if (grads) {
    grads->q_weight.noalias() += c.q1.transpose() * dq_proj;
    grads->q_bias += dq_proj.colwise().sum();
    grads->k_weight.noalias() += c.embedded.transpose() * dk_proj;
    grads->k_bias += dk_proj.colwise().sum();
    grads->v_weight.noalias() += c.embedded.transpose() * dv_proj;
    grads->v_bias += dv_proj.colwise().sum();
  }
  dq1.noalias() += dq_proj * p.q_weight.transpose();
  Tensor dembedded = dk_proj * p.k_weight.transpose();
  dembedded.noalias() += dv_proj * p.v_weight.transpose();

  const Tensor dquery = layer_norm_backward(dq1, p.norm1_gain, c.norm1_xhat, c.norm1_rstd,
                                            grads ? &grads->norm1_gain : nullptr,
                                            grads ? &grads->norm1_bias : nullptr);
  if (grads) {
    if (config.learnable_queries) grads->query += dquery;
    grads->input_weight.noalias() += c.tokens.transpose() * dembedded;
    grads->input_bias += dembedded.colwise().sum();
  }
  return dembedded * p.input_weight.transpose();
}

}  // namespace cxrlt
