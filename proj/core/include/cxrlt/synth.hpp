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

#ifndef CXRLT_SYNTH_HPP_
#define CXRLT_SYNTH_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "cxrlt/datakit.hpp"
#include "cxrlt/image_store.hpp"

namespace cxrlt {

// Parameters of the synthetic long-tailed multi-label dataset.
struct SynthConfig {
  int num_samples = 2000;
  int num_classes = 8;
  int image_size = 64;
  // Class c gets round(num_samples * base_prevalence * (c + 1)^-exponent) positives.
  double powerlaw_exponent = 1.5;
  // Probability that a positive of class c is placed on a sample already
  // positive for class c - 1.
  double label_correlation = 0.2;
  // Mixing weight pulling a sample's demographics toward a group tied to its
  // rarest positive class.
  double demographic_skew = 0.3;
  std::uint64_t seed = 0;

  double base_prevalence = 0.4;
  std::array<double, 3> split_fractions = {0.71, 0.08, 0.21};
  double pattern_amplitude = 0.3;
  double noise_stddev = 0.08;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

inline constexpr std::string_view kSupportDeviceName = "Support Devices";

// Class 0 is the support-device class; the rest are "Finding 01", ...
std::vector<std::string> synthetic_class_names(int num_classes);

// Exact per-class positive counts the generator will realize.
std::vector<long> synthetic_target_counts(const SynthConfig& config);

struct SyntheticDataset {
  DatasetManifest manifest;
  ImageStore images;
};

// Deterministic in `config`. Every positive label stamps a class-specific
// textured blob at a class-specific position onto a noisy background.
SyntheticDataset generate_synthetic(const SynthConfig& config);

SynthConfig synth_config_from_json(std::string_view json_text);
std::string to_json(const SynthConfig& config);

}  // namespace cxrlt

#endif  // CXRLT_SYNTH_HPP_
