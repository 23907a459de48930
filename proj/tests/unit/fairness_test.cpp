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

#include <gtest/gtest.h>

#include <cmath>

#include "cxrlt/error.hpp"
#include "cxrlt/metrics.hpp"
#include "cxrlt/random.hpp"

namespace cxrlt {
namespace {

struct Instance {
  ScoreMatrix scores;
  LabelMatrix labels;
  DemographicGroups groups;
};

// Two groups, one class: positives at 0.9 or 0.1, negatives at 0.5. The
// pooled Youden threshold is 0.9, so group FNRs are 1/5 and 2/5.
Instance two_fnr_case() {
  const double s[] = {0.9, 0.9, 0.9, 0.9, 0.1, 0.5, 0.5, 0.9, 0.9, 0.9, 0.1, 0.1, 0.5, 0.5};
  const std::uint8_t y[] = {1, 1, 1, 1, 1, 0, 0, 1, 1, 1, 1, 1, 0, 0};
  Instance in;
  in.scores.values.resize(14, 1);
  in.labels.values.resize(14, 1);
  for (int i = 0; i < 14; ++i) {
    in.scores.values(i, 0) = s[i];
    in.labels.values(i, 0) = y[i];
    in.groups.group_of.push_back(i < 7 ? 0 : 1);
  }
  in.groups.names = {"a", "b"};
  return in;
}

TEST(EqualityOfOpportunity, HandBuiltRatio) {
  const Instance in = two_fnr_case();
  const FairnessReport r = equality_of_opportunity(in.scores, in.labels, in.groups);
  EXPECT_DOUBLE_EQ(r.thresholds_used[0], 0.9);
  EXPECT_NEAR(r.per_class_fnr(0, 0), 0.2, 1e-12);
  EXPECT_NEAR(r.per_class_fnr(0, 1), 0.4, 1e-12);
  EXPECT_NEAR(r.eo_mean, 0.5, 1e-12);
  EXPECT_EQ(r.eo_std, 0.0);
}

TEST(EqualityOfOpportunity, IdenticalGroupsGiveOne) {
  Rng rng(9);
  const int per_group = 40, groups = 3, classes = 4;
  Instance in;
  in.scores.values.resize(per_group * groups, classes);
  in.labels.values.resize(per_group * groups, classes);
  for (int i = 0; i < per_group; ++i) {
    for (int c = 0; c < classes; ++c) {
      const double s = rng.uniform();
      const std::uint8_t y = i % 3 == c % 3 ? 1 : rng.bernoulli(0.3);
      for (int g = 0; g < groups; ++g) {
        in.scores.values(g * per_group + i, c) = s;
        in.labels.values(g * per_group + i, c) = y;
      }
    }
  }
  for (int g = 0; g < groups; ++g) {
    for (int i = 0; i < per_group; ++i) in.groups.group_of.push_back(g);
    in.groups.names.push_back("g" + std::to_string(g));
  }
  const FairnessReport r = equality_of_opportunity(in.scores, in.labels, in.groups);
  EXPECT_EQ(r.included_classes.size(), 4u);
  EXPECT_EQ(r.eo_mean, 1.0);
  EXPECT_EQ(r.eo_std, 0.0);
}

TEST(EqualityOfOpportunity, ZeroFnrEverywhereIsOne) {
  Instance in = two_fnr_case();
  for (int i = 0; i < 14; ++i) {
    if (in.labels.values(i, 0)) in.scores.values(i, 0) = 0.9;
  }
  EXPECT_EQ(equality_of_opportunity(in.scores, in.labels, in.groups).eo_mean, 1.0);
}

TEST(EqualityOfOpportunity, ExcludesClassesMissingGroupPositives) {
  Instance in = two_fnr_case();
  in.scores.values.conservativeResize(14, 2);
  in.labels.values.conservativeResize(14, 2);
  for (int i = 0; i < 14; ++i) {
    in.scores.values(i, 1) = 0.1 * (i % 5);
    in.labels.values(i, 1) = i < 7 && i % 2 == 0;  // only group a has positives
  }
  const FairnessReport r = equality_of_opportunity(in.scores, in.labels, in.groups);
  ASSERT_EQ(r.excluded.size(), 1u);
  EXPECT_EQ(r.excluded[0].class_index, 1);
  EXPECT_NE(r.excluded[0].reason.find("b"), std::string::npos);
  EXPECT_EQ(r.included_classes, std::vector<int>{0});
  EXPECT_TRUE(std::isnan(r.per_class_eo_ratio[1]));
  EXPECT_NEAR(r.eo_mean, 0.5, 1e-12);
}

TEST(EqualityOfOpportunity, GroupOrderInvariant) {
  Rng rng(21);
  Instance in;
  const int n = 90;
  in.scores.values.resize(n, 3);
  in.labels.values.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      in.scores.values(i, c) = rng.uniform();
      in.labels.values(i, c) = rng.bernoulli(0.4);
    }
    in.groups.group_of.push_back(i % 3);
  }
  in.groups.names = {"x", "y", "z"};
  const FairnessReport a = equality_of_opportunity(in.scores, in.labels, in.groups);
  Instance swapped = in;
  for (int& g : swapped.groups.group_of) g = 2 - g;
  swapped.groups.names = {"z", "y", "x"};
  const FairnessReport b = equality_of_opportunity(swapped.scores, swapped.labels, swapped.groups);
  EXPECT_DOUBLE_EQ(a.eo_mean, b.eo_mean);
  EXPECT_DOUBLE_EQ(a.eo_std, b.eo_std);
  for (double r : a.per_class_eo_ratio) {
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
  }
}

TEST(EqualityOfOpportunity, NeedsTwoGroups) {
  Instance in = two_fnr_case();
  in.groups.names = {"only"};
  for (int& g : in.groups.group_of) g = 0;
  EXPECT_THROW(equality_of_opportunity(in.scores, in.labels, in.groups), ConfigError);
}

TEST(DemographicGroups, PresentCategoriesOnly) {
  std::vector<Record> records;
  const Race races[] = {Race::kAsian, Race::kWhite, Race::kAsian};
  for (int i = 0; i < 3; ++i) {
    Record r;
    r.sample_id = "s" + std::to_string(i);
    r.image_ref = r.sample_id;
    r.labels = {0};
    r.race = races[i];
    r.gender = i == 0 ? Gender::kFemale : Gender::kMale;
    records.push_back(r);
  }
  const DatasetManifest m({"c"}, records);
  const DemographicGroups race = demographic_groups(m, Attribute::kRace);
  EXPECT_EQ(race.names, (std::vector<std::string>{"White", "Asian"}));
  EXPECT_EQ(race.group_of, (std::vector<int>{1, 0, 1}));
  EXPECT_EQ(demographic_groups(m, Attribute::kGender).names.size(), 2u);
}

}  // namespace
}  // namespace cxrlt
