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

#include "cxrlt/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cxrlt/error.hpp"

namespace cxrlt {
namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_shapes(const Tensor& logits, const Tensor& labels) {
  if (logits.rows() != labels.rows() || logits.cols() != labels.cols()) {
    throw ShapeError("logits are " + std::to_string(logits.rows()) + "x" +
                     std::to_string(logits.cols()) + " but labels are " +
                     std::to_string(labels.rows()) + "x" + std::to_string(labels.cols()));
  }
  if (logits.size() == 0) throw ShapeError("empty loss input");
}

void check_per_class(std::span<const double> v, const Tensor& logits, const char* what) {
  if (static_cast<Eigen::Index>(v.size()) != logits.cols()) {
    throw ShapeError(std::string(what) + " has " + std::to_string(v.size()) + " entries for " +
                     std::to_string(logits.cols()) + " classes");
  }
}

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kBce: return "bce";
    case LossKind::kWeightedBce: return "weighted_bce";
    case LossKind::kFocal: return "focal";
  }
  return "bce";
}

std::optional<LossKind> parse_loss_kind(std::string_view text) {
  if (text == "bce") return LossKind::kBce;
  if (text == "weighted_bce") return LossKind::kWeightedBce;
  if (text == "focal") return LossKind::kFocal;
  return std::nullopt;
}

void LossConfig::validate(int num_classes) const {
  for (double w : pos_weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("pos_weights must be positive and finite");
  }
  for (double a : alpha) {
    if (!(a > 0.0 && a <= 1.0)) throw ConfigError("focal alpha must lie in (0, 1]");
  }
  if (!(gamma >= 0.0)) throw ConfigError("focal gamma must be >= 0");
  if (num_classes > 0) {
    if (kind == LossKind::kWeightedBce && static_cast<int>(pos_weights.size()) != num_classes) {
      throw ConfigError("weighted_bce needs " + std::to_string(num_classes) + " pos_weights");
    }
    if (!alpha.empty() && static_cast<int>(alpha.size()) != num_classes) {
      throw ConfigError("focal alpha needs " + std::to_string(num_classes) + " entries");
    }
  }
}

LossValue bce(const Tensor& logits, const Tensor& labels) {
  check_shapes(logits, labels);
  const std::vector<double> ones(static_cast<std::size_t>(logits.cols()), 1.0);
  return weighted_bce(logits, labels, ones);
}

LossValue weighted_bce(const Tensor& logits, const Tensor& labels,
                       std::span<const double> pos_weights) {
  check_shapes(logits, labels);
  check_per_class(pos_weights, logits, "pos_weights");
  const double n = static_cast<double>(logits.size());
  LossValue out;
  out.grad.resize(logits.rows(), logits.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      const double z = logits(i, c);
      const double y = labels(i, c);
      const double w = pos_weights[static_cast<std::size_t>(c)];
      // -[w y log s(z) + (1 - y) log(1 - s(z))]
      total += w * y * softplus(-z) + (1.0 - y) * softplus(z);
      out.grad(i, c) = (-w * y * sigmoid(-z) + (1.0 - y) * sigmoid(z)) / n;
    }
  }
  out.value = total / n;
  return out;
}

LossValue focal_loss(const Tensor& logits, const Tensor& labels, std::span<const double> alpha,
                     double gamma) {
  check_shapes(logits, labels);
  if (!(gamma >= 0.0)) throw ConfigError("focal gamma must be >= 0");
  if (!alpha.empty()) check_per_class(alpha, logits, "alpha");
  for (double a : alpha) {
    if (!(a > 0.0 && a <= 1.0)) throw ConfigError("focal alpha must lie in (0, 1]");
  }
  const double n = static_cast<double>(logits.size());
  LossValue out;
  out.grad.resize(logits.rows(), logits.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      const double z = logits(i, c);
      const double y = labels(i, c);
      const double a = alpha.empty() ? 0.5 : alpha[static_cast<std::size_t>(c)];
      double value = 0.0, grad = 0.0;
      if (y > 0.5) {
        // a (1 - p)^g * -log p, with 1 - p = s(-z) and -log p = softplus(-z).
        const double q = sigmoid(-z);
        const double sp = softplus(-z);
        const double qg = std::pow(q, gamma);
        value = a * qg * sp;
        grad = -a * qg * (gamma * (1.0 - q) * sp + q);
      } else {
        const double p = sigmoid(z);
        const double sp = softplus(z);
        const double pg = std::pow(p, gamma);
        value = (1.0 - a) * pg * sp;
        grad = (1.0 - a) * pg * (gamma * (1.0 - p) * sp + p);
      }
      total += value;
      out.grad(i, c) = grad / n;
    }
  }
  out.value = total / n;
  return out;
}

LossValue evaluate_loss(const LossConfig& config, const Tensor& logits, const Tensor& labels) {
  switch (config.kind) {
    case LossKind::kBce: return bce(logits, labels);
    case LossKind::kWeightedBce: return weighted_bce(logits, labels, config.pos_weights);
    case LossKind::kFocal: return focal_loss(logits, labels, config.alpha, config.gamma);
  }
  return bce(logits, labels);
}

std::vector<double> compute_pos_weights(const LabelMatrix& labels) {
  const auto n = static_cast<double>(labels.values.rows());
  std::vector<double> weights;
  for (Eigen::Index c = 0; c < labels.values.cols(); ++c) {
    const double pos = labels.values.col(c).cast<double>().sum();
    if (pos <= 0.0) {
      const std::string name = static_cast<std::size_t>(c) < labels.class_names.size()
                                   ? labels.class_names[static_cast<std::size_t>(c)]
                                   : std::to_string(c);
      throw ConfigError("class '" + name + "' has no positive samples");
    }
    weights.push_back((n - pos) / pos);
  }
  return weights;
}

std::vector<double> focal_alpha_from_ap(std::span<const double> average_precision) {
  std::vector<double> alpha;
  double mean = 0.0;
  for (double ap : average_precision) {
    alpha.push_back(1.0 - std::clamp(ap, 0.0, 1.0));
    mean += alpha.back();
  }
  if (alpha.empty()) return alpha;
  mean /= static_cast<double>(alpha.size());
  for (double& a : alpha) a = mean > 0.0 ? std::clamp(0.5 * a / mean, 0.01, 1.0) : 0.5;
  return alpha;
}

}  // namespace cxrlt
