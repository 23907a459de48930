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

#ifndef CXRLT_AUGMENT_HPP_
#define CXRLT_AUGMENT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cxrlt/tensor.hpp"

namespace cxrlt {

enum class AugmentKind { kRotate, kPad, kBrightness, kGaussianBlur, kContrast, kPosterize };

std::string_view to_string(AugmentKind kind);
std::optional<AugmentKind> parse_augment_kind(std::string_view text);

// One randomized step. The parameter is drawn uniformly from [min, max]:
// degrees for rotate, pixels for pad, a multiplicative factor for brightness
// and contrast, sigma in pixels for blur, bit depth for posterize. Pad and
// posterize draw integers.
struct AugmentStep {
  AugmentKind kind = AugmentKind::kRotate;
  double probability = 0.5;
  double min = 0.0;
  double max = 0.0;

  bool operator==(const AugmentStep&) const = default;
};

class AugmentPolicy {
 public:
  AugmentPolicy() = default;
  // Throws ConfigError if any step's range violates its kind's limits.
  explicit AugmentPolicy(std::vector<AugmentStep> steps);

  const std::vector<AugmentStep>& steps() const { return steps_; }
  bool operator==(const AugmentPolicy&) const = default;

 private:
  std::vector<AugmentStep> steps_;
};

// Rotation +-15 deg, pad 0..8 px, brightness and contrast 0.8..1.2, blur
// sigma 0..1.5, posterize 6..8 bits; each step fires with probability 0.5.
AugmentPolicy default_policy();

// Applies the steps in order with a stream seeded by `seed`; the result has
// the input's shape and lies in [0, 1].
Image apply_policy(const Image& image, const AugmentPolicy& policy, std::uint64_t seed);

std::string to_json(const AugmentPolicy& policy);
AugmentPolicy policy_from_json(std::string_view json_text);

// Individual transforms.
// Bilinear rotation about the image center; pixels mapped from outside the
// frame are 0.
Image rotate(const Image& image, double degrees);
// Reflect-pads by `pad` pixels on every side, then bilinearly resizes back.
Image pad_and_resize(const Image& image, int pad);
Image adjust_brightness(const Image& image, double factor);
Image gaussian_blur(const Image& image, double sigma);
Image adjust_contrast(const Image& image, double factor);
// Keeps the top `bits` bits of the 8-bit quantized value.
Image posterize(const Image& image, int bits);
Image resize_bilinear(const Image& image, int rows, int cols);

}  // namespace cxrlt

#endif  // CXRLT_AUGMENT_HPP_
