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

#include "cxrlt/imbalance.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "cxrlt/error.hpp"
#include "cxrlt/random.hpp"

namespace cxrlt {
namespace {

DatasetManifest training_records(const DatasetManifest& manifest) {
  DatasetManifest train = manifest.select(Split::kTrain);
  if (train.empty()) throw ConfigError("training split is empty");
  return train;
}

void require_positives(const DatasetManifest& train, const std::vector<long>& counts) {
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) {
      throw ConfigError("class '" + train.class_names()[c] + "' has no positive training samples");
    }
  }
}

}  // namespace

std::string_view to_string(ResampleKind kind) { return kind == ResampleKind::kCrt ? "crt" : "ros"; }

std::optional<ResampleKind> parse_resample_kind(std::string_view text) {
  if (text == "crt") return ResampleKind::kCrt;
  if (text == "ros") return ResampleKind::kRos;
  return std::nullopt;
}

void ResampleSpec::validate() const {
  if (!(crt_factor > 0.0 && crt_factor <= 1.0)) throw ConfigError("crt_factor must lie in (0, 1]");
  if (ros_threshold < 0) throw ConfigError("ros_threshold must be >= 1 (or 0 for the median)");
}

DatasetManifest crt_resample(const DatasetManifest& manifest, double factor, std::uint64_t seed) {
  if (!(factor > 0.0 && factor <= 1.0)) throw ConfigError("crt factor must lie in (0, 1]");
  const DatasetManifest train = training_records(manifest);
  std::vector<long> counts = class_counts(train, Split::kTrain);
  require_positives(train, counts);

  const long orig_min = *std::min_element(counts.begin(), counts.end());
  const long orig_max = *std::max_element(counts.begin(), counts.end());
  const long floor = static_cast<long>(std::ceil(factor * static_cast<double>(orig_min)));

  const auto& records = train.records();
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 0x637274));
  rng.shuffle(order);

  std::vector<char> keep(records.size(), 1);
  std::vector<long> trial(counts.size());
  for (std::size_t i : order) {
    const auto& labels = records[i].labels;
    if (std::none_of(labels.begin(), labels.end(), [](std::uint8_t v) { return v != 0; })) continue;
    bool ok = true;
    for (std::size_t c = 0; c < labels.size(); ++c) {
      trial[c] = counts[c] - labels[c];
      if (labels[c] && trial[c] < floor) ok = false;
    }
    if (!ok) continue;
    const long new_min = *std::min_element(trial.begin(), trial.end());
    const long new_max = *std::max_element(trial.begin(), trial.end());
    // new_max / new_min <= orig_max / orig_min, in integers
    if (new_max * orig_min > orig_max * new_min) continue;
    keep[i] = 0;
    counts = trial;
  }

  std::vector<Record> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (keep[i]) out.push_back(records[i]);
  }
  return DatasetManifest(train.class_names(), std::move(out));
}

DatasetManifest random_oversample(const DatasetManifest& manifest, long threshold,
                                  std::uint64_t seed) {
  if (threshold < 1) throw ConfigError("oversampling threshold must be >= 1");
  const DatasetManifest train = training_records(manifest);
  std::vector<long> counts = class_counts(train, Split::kTrain);
  require_positives(train, counts);

  const auto& records = train.records();
  std::vector<Record> out = records;
  std::map<std::string, int> copies;
  Rng rng(mix_seed(seed, 0x726f73));
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] >= threshold) continue;
    std::vector<std::size_t> positives;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].labels[c]) positives.push_back(i);
    }
    while (counts[c] < threshold) {
      const Record& src = records[positives[rng.index(positives.size())]];
      Record dup = src;
      dup.sample_id = src.sample_id + "#dup" + std::to_string(copies[src.sample_id]++);
      dup.provenance = "dup:" + src.sample_id;
      for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += src.labels[k];
      out.push_back(std::move(dup));
    }
  }
  return DatasetManifest(train.class_names(), std::move(out));
}

long default_ros_threshold(const DatasetManifest& manifest) {
  std::vector<long> counts = class_counts(training_records(manifest), Split::kTrain);
  if (counts.empty()) throw ConfigError("manifest has no classes");
  std::sort(counts.begin(), counts.end());
  const std::size_t n = counts.size();
  if (n % 2 == 1) return std::max(1L, counts[n / 2]);
  return std::max(1L, (counts[n / 2 - 1] + counts[n / 2] + 1) / 2);
}

DatasetManifest resample(const DatasetManifest& manifest, const ResampleSpec& spec) {
  spec.validate();
  if (spec.kind == ResampleKind::kCrt) return crt_resample(manifest, spec.crt_factor, spec.seed);
  const long threshold = spec.ros_threshold > 0 ? spec.ros_threshold : default_ros_threshold(manifest);
  return random_oversample(manifest, threshold, spec.seed);
}

}  // namespace cxrlt
