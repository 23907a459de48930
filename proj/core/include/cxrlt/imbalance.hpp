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

#ifndef CXRLT_IMBALANCE_HPP_
#define CXRLT_IMBALANCE_HPP_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "cxrlt/datakit.hpp"

namespace cxrlt {

enum class ResampleKind { kCrt, kRos };

std::string_view to_string(ResampleKind kind);
std::optional<ResampleKind> parse_resample_kind(std::string_view text);

struct ResampleSpec {
  ResampleKind kind = ResampleKind::kCrt;
  double crt_factor = 0.7;
  long ros_threshold = 0;  // 0 -> median class count
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

// Subsamples the training split so every class keeps at least
// ceil(factor * smallest class count) positives. Records are visited once in
// seeded random order; a record is dropped only if no class it carries falls
// below the floor and the max/min class-count ratio does not grow. Records
// without positive labels are kept. Returns training records only.
DatasetManifest crt_resample(const DatasetManifest& manifest, double factor, std::uint64_t seed);

// Duplicates random positives of each class below `threshold` (classes in
// index order, sampling with replacement from the original records) until
// the class reaches the threshold. Copies are named "<id>#dup<k>" and carry
// provenance "dup:<id>". Returns training records only.
DatasetManifest random_oversample(const DatasetManifest& manifest, long threshold,
                                  std::uint64_t seed);

// Median of the per-class training counts (mean of the two middle values,
// rounded up, for an even class count).
long default_ros_threshold(const DatasetManifest& manifest);

DatasetManifest resample(const DatasetManifest& manifest, const ResampleSpec& spec);

}  // namespace cxrlt

#endif  // CXRLT_IMBALANCE_HPP_
