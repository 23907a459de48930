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

#include "cxrlt/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "cxrlt/error.hpp"
#include "cxrlt/random.hpp"

namespace cxrlt {
namespace {

double sample_at(const Image& image, double y, double x) {
  const int y0 = static_cast<int>(std::floor(y));
  const int x0 = static_cast<int>(std::floor(x));
  const double fy = y - y0;
  const double fx = x - x0;
  auto px = [&](int r, int c) -> double {
    if (r < 0 || c < 0 || r >= image.rows() || c >= image.cols()) return 0.0;
    return image(r, c);
  };
  double v = px(y0, x0) * (1.0 - fy) * (1.0 - fx);
  if (fx != 0.0) v += px(y0, x0 + 1) * (1.0 - fy) * fx;
  if (fy != 0.0) v += px(y0 + 1, x0) * fy * (1.0 - fx);
  if (fx != 0.0 && fy != 0.0) v += px(y0 + 1, x0 + 1) * fy * fx;
  return v;
}

int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

void check_step(const AugmentStep& s) {
  const std::string name(to_string(s.kind));
  if (!(s.probability >= 0.0 && s.probability <= 1.0)) {
    throw ConfigError(name + ": probability must lie in [0, 1]");
  }
  if (!(s.min <= s.max)) throw ConfigError(name + ": min must not exceed max");
  auto is_int = [](double v) { return v == std::floor(v); };
  switch (s.kind) {
    case AugmentKind::kRotate:
      if (s.min < -180.0 || s.max > 180.0) throw ConfigError(name + ": range must lie in [-180, 180]");
      break;
    case AugmentKind::kPad:
      if (s.min < 0.0 || !is_int(s.min) || !is_int(s.max)) {
        throw ConfigError(name + ": pad amounts must be nonnegative integers");
      }
      break;
    case AugmentKind::kBrightness:
    case AugmentKind::kContrast:
      if (!(s.min > 0.0)) throw ConfigError(name + ": factors must be > 0");
      break;
    case AugmentKind::kGaussianBlur:
      if (s.min < 0.0) throw ConfigError(name + ": sigma must be >= 0");
      break;
    case AugmentKind::kPosterize:
      if (s.min < 1.0 || s.max > 8.0 || !is_int(s.min) || !is_int(s.max)) {
        throw ConfigError(name + ": bits must be integers in [1, 8]");
      }
      break;
  }
}

}  // namespace

std::string_view to_string(AugmentKind kind) {
  switch (kind) {
    case AugmentKind::kRotate: return "rotate";
    case AugmentKind::kPad: return "pad";
    case AugmentKind::kBrightness: return "brightness";
    case AugmentKind::kGaussianBlur: return "gaussian_blur";
    case AugmentKind::kContrast: return "contrast";
    case AugmentKind::kPosterize: return "posterize";
  }
  return "rotate";
}

std::optional<AugmentKind> parse_augment_kind(std::string_view text) {
  for (auto k : {AugmentKind::kRotate, AugmentKind::kPad, AugmentKind::kBrightness,
                 AugmentKind::kGaussianBlur, AugmentKind::kContrast, AugmentKind::kPosterize}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

AugmentPolicy::AugmentPolicy(std::vector<AugmentStep> steps) : steps_(std::move(steps)) {
  for (const AugmentStep& s : steps_) check_step(s);
}

AugmentPolicy default_policy() {
  return AugmentPolicy({
      {AugmentKind::kRotate, 0.5, -15.0, 15.0},
      {AugmentKind::kPad, 0.5, 0.0, 8.0},
      {AugmentKind::kBrightness, 0.5, 0.8, 1.2},
      {AugmentKind::kGaussianBlur, 0.5, 0.0, 1.5},
      {AugmentKind::kContrast, 0.5, 0.8, 1.2},
      {AugmentKind::kPosterize, 0.5, 6.0, 8.0},
  });
}

Image rotate(const Image& image, double degrees) {
  if (degrees == 0.0) return image;
  const double theta = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(theta), s = std::sin(theta);
  const double cy = 0.5 * static_cast<double>(image.rows() - 1);
  const double cx = 0.5 * static_cast<double>(image.cols() - 1);
  Image out(image.rows(), image.cols());
  for (Eigen::Index y = 0; y < image.rows(); ++y) {
    for (Eigen::Index x = 0; x < image.cols(); ++x) {
      // Inverse mapping: rotate the output coordinate back into the source.
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      const double sx = c * dx + s * dy + cx;
      const double sy = -s * dx + c * dy + cy;
      out(y, x) = sample_at(image, sy, sx);
    }
  }
  return out;
}

Image resize_bilinear(const Image& image, int rows, int cols) {
  if (rows == image.rows() && cols == image.cols()) return image;
  Image out(rows, cols);
  const double sy = static_cast<double>(image.rows()) / rows;
  const double sx = static_cast<double>(image.cols()) / cols;
  const double max_y = static_cast<double>(image.rows() - 1);
  const double max_x = static_cast<double>(image.cols() - 1);
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      const double py = std::clamp((y + 0.5) * sy - 0.5, 0.0, max_y);
      const double px = std::clamp((x + 0.5) * sx - 0.5, 0.0, max_x);
      out(y, x) = sample_at(image, py, px);
    }
  }
  return out;
}

Image pad_and_resize(const Image& image, int pad) {
  if (pad < 0) throw ConfigError("pad must be >= 0");
  if (pad == 0) return image;
  const int rows = static_cast<int>(image.rows());
  const int cols = static_cast<int>(image.cols());
  Image padded(rows + 2 * pad, cols + 2 * pad);
  for (int y = 0; y < padded.rows(); ++y) {
    for (int x = 0; x < padded.cols(); ++x) {
      padded(y, x) = image(reflect(y - pad, rows), reflect(x - pad, cols));
    }
  }
  return resize_bilinear(padded, rows, cols);
}

Image adjust_brightness(const Image& image, double factor) {
  return (image * factor).cwiseMax(0.0).cwiseMin(1.0);
}

Image adjust_contrast(const Image& image, double factor) {
  const double mean = image.mean();
  return ((image.array() - mean) * factor + mean).matrix().cwiseMax(0.0).cwiseMin(1.0);
}

Image gaussian_blur(const Image& image, double sigma) {
  if (sigma <= 0.0) return image;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * i * i / (sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = w;
    total += w;
  }
  for (double& w : kernel) w /= total;

  const int rows = static_cast<int>(image.rows());
  const int cols = static_cast<int>(image.cols());
  Image tmp(rows, cols), out(rows, cols);
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] * image(y, reflect(x + k, cols));
      }
      tmp(y, x) = acc;
    }
  }
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] * tmp(reflect(y + k, rows), x);
      }
      out(y, x) = acc;
    }
  }
  return out;
}

Image posterize(const Image& image, int bits) {
  if (bits < 1 || bits > 8) throw ConfigError("posterize bits must lie in [1, 8]");
  const int mask = ~((1 << (8 - bits)) - 1) & 0xFF;
  Image out(image.rows(), image.cols());
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    const int q = static_cast<int>(std::lround(std::clamp(image.data()[i], 0.0, 1.0) * 255.0));
    out.data()[i] = static_cast<double>(q & mask) / 255.0;
  }
  return out;
}

Image apply_policy(const Image& image, const AugmentPolicy& policy, std::uint64_t seed) {
  Rng rng(seed);
  Image out = image;
  for (const AugmentStep& s : policy.steps()) {
    if (!rng.bernoulli(s.probability)) continue;
    switch (s.kind) {
      case AugmentKind::kRotate:
        out = rotate(out, rng.uniform(s.min, s.max));
        break;
      case AugmentKind::kPad:
        out = pad_and_resize(out, rng.integer(static_cast<int>(s.min), static_cast<int>(s.max)));
        break;
      case AugmentKind::kBrightness:
        out = adjust_brightness(out, rng.uniform(s.min, s.max));
        break;
      case AugmentKind::kGaussianBlur:
        out = gaussian_blur(out, rng.uniform(s.min, s.max));
        break;
      case AugmentKind::kContrast:
        out = adjust_contrast(out, rng.uniform(s.min, s.max));
        break;
      case AugmentKind::kPosterize:
        out = posterize(out, rng.integer(static_cast<int>(s.min), static_cast<int>(s.max)));
        break;
    }
  }
  return out.cwiseMax(0.0).cwiseMin(1.0);
}

std::string to_json(const AugmentPolicy& policy) {
  nlohmann::json steps = nlohmann::json::array();
  for (const AugmentStep& s : policy.steps()) {
    steps.push_back({{"kind", to_string(s.kind)},
                     {"probability", s.probability},
                     {"min", s.min},
                     {"max", s.max}});
  }
  return nlohmann::json{{"steps", steps}}.dump(2);
}

AugmentPolicy policy_from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid augmentation policy JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("steps") || !j["steps"].is_array()) {
    throw ConfigError("augmentation policy needs a 'steps' array");
  }
  std::vector<AugmentStep> steps;
  for (const auto& s : j["steps"]) {
    AugmentStep step;
    const auto kind = parse_augment_kind(s.value("kind", std::string()));
    if (!kind) throw ConfigError("unknown augmentation kind: " + s.value("kind", std::string()));
    step.kind = *kind;
    try {
      step.probability = s.value("probability", step.probability);
      step.min = s.at("min").get<double>();
      step.max = s.at("max").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("invalid augmentation step: ") + e.what());
    }
    steps.push_back(step);
  }
  return AugmentPolicy(std::move(steps));
}

}  // namespace cxrlt
