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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cxrlt/error.hpp"
#include "cxrlt/synth.hpp"

namespace cxrlt {
namespace {

DatasetManifest long_tailed() {
  SynthConfig c;
  c.num_samples = 600;
  c.num_classes = 6;
  c.image_size = 16;
  c.seed = 2;
  return generate_synthetic(c).manifest;
}

std::vector<long> recount(const DatasetManifest& m) {
  std::vector<long> counts(static_cast<std::size_t>(m.num_classes()), 0);
  for (const Record& r : m.records()) {
    for (std::size_t c = 0; c < r.labels.size(); ++c) counts[c] += r.labels[c];
  }
  return counts;
}

std::set<std::string> ids(const DatasetManifest& m) {
  std::set<std::string> out;
  for (const Record& r : m.records()) out.insert(r.sample_id);
  return out;
}

TEST(Crt, FloorRatioAndSubset) {
  const DatasetManifest m = long_tailed();
  const auto before = recount(m.select(Split::kTrain));
  const long lo = *std::min_element(before.begin(), before.end());
  const long hi = *std::max_element(before.begin(), before.end());
  const long floor = static_cast<long>(std::ceil(0.7 * lo));
  const DatasetManifest out = crt_resample(m, 0.7, 1);
  const auto after = recount(out);
  for (long n : after) EXPECT_GE(n, floor);
  const long new_lo = *std::min_element(after.begin(), after.end());
  const long new_hi = *std::max_element(after.begin(), after.end());
  EXPECT_LE(static_cast<double>(new_hi) / new_lo, static_cast<double>(hi) / lo);
  EXPECT_LT(new_hi, hi);
  const auto source = ids(m);
  for (const auto& id : ids(out)) EXPECT_TRUE(source.count(id));
  for (const Record& r : out.records()) EXPECT_EQ(r.split, Split::kTrain);
}

TEST(Crt, SeedsGiveDistinctDeterministicManifests) {
  const DatasetManifest m = long_tailed();
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::string text = format_manifest(crt_resample(m, 0.7, seed));
    EXPECT_EQ(text, format_manifest(crt_resample(m, 0.7, seed)));
    seen.insert(text);
  }
  EXPECT_EQ(seen.size(), 5u);
}

TEST(Crt, BalancedInputUnchanged) {
  std::vector<Record> records;
  for (int i = 0; i < 4; ++i) {
    Record r;
    r.sample_id = "r" + std::to_string(i);
    r.image_ref = r.sample_id;
    r.labels = {static_cast<std::uint8_t>(i % 2 == 0), static_cast<std::uint8_t>(i % 2 == 1)};
    records.push_back(r);
  }
  const DatasetManifest m({"a", "b"}, records);
  EXPECT_EQ(format_manifest(crt_resample(m, 1.0, 3)), format_manifest(m));
}

TEST(Crt, Errors) {
  const DatasetManifest m = long_tailed();
  EXPECT_THROW(crt_resample(m, 0.0, 1), ConfigError);
  EXPECT_THROW(crt_resample(m.select(Split::kTest).select(Split::kTrain), 0.7, 1), ConfigError);
}

TEST(Ros, ReachesThresholdAndKeepsOriginals) {
  const DatasetManifest m = long_tailed();
  const DatasetManifest out = random_oversample(m, 60, 4);
  for (long n : recount(out)) EXPECT_GE(n, 60);
  const auto before = ids(m.select(Split::kTrain));
  const auto after = ids(out);
  for (const auto& id : before) EXPECT_TRUE(after.count(id));
  for (const Record& r : out.records()) {
    if (before.count(r.sample_id)) continue;
    ASSERT_EQ(r.provenance.rfind("dup:", 0), 0u);
    const std::string source = r.provenance.substr(4);
    EXPECT_TRUE(before.count(source));
    EXPECT_EQ(r.sample_id.rfind(source + "#dup", 0), 0u);
  }
  EXPECT_EQ(format_manifest(out), format_manifest(random_oversample(m, 60, 4)));
}

TEST(Ros, AboveThresholdIsIdentity) {
  const DatasetManifest m = long_tailed();
  EXPECT_EQ(format_manifest(random_oversample(m, 1, 0)), format_manifest(m.select(Split::kTrain)));
}

TEST(Ros, ZeroPositiveClassNamed) {
  std::vector<Record> records(2);
  for (int i = 0; i < 2; ++i) {
    records[static_cast<std::size_t>(i)].sample_id = "r" + std::to_string(i);
    records[static_cast<std::size_t>(i)].image_ref = "x";
    records[static_cast<std::size_t>(i)].labels = {1, 0};
  }
  const DatasetManifest m({"a", "Lonely"}, records);
  try {
    random_oversample(m, 5, 0);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("Lonely"), std::string::npos);
  }
}

TEST(Ros, MedianThreshold) {
  const DatasetManifest m = long_tailed();
  auto counts = class_counts(m, Split::kTrain);
  std::sort(counts.begin(), counts.end());
  EXPECT_EQ(default_ros_threshold(m), (counts[2] + counts[3] + 1) / 2);
  ResampleSpec spec;
  spec.kind = ResampleKind::kRos;
  for (long n : recount(resample(m, spec))) EXPECT_GE(n, default_ros_threshold(m));
  spec.crt_factor = 1.5;
  EXPECT_THROW(spec.validate(), ConfigError);
}

}  // namespace
}  // namespace cxrlt
