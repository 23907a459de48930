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

#include "cxrlt/report.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cxrlt {
namespace {

void fill(ScoreMatrix& s, LabelMatrix& y) {
  s.class_names = y.class_names = {"a", "b", "c"};
  s.values.resize(6, 3);
  y.values.resize(6, 3);
  s.values << 0.9, 0.2, 0.5, 0.8, 0.4, 0.5, 0.7, 0.6, 0.5, 0.3, 0.1, 0.5, 0.2, 0.9, 0.5, 0.1, 0.3, 0.5;
  y.values << 1, 0, 0, 1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0;
}

TEST(Evaluate, PerClassAndMeans) {
  ScoreMatrix s;
  LabelMatrix y;
  fill(s, y);
  const EvaluationReport r = evaluate(s, y, {}, "run");
  ASSERT_EQ(r.classes.size(), 3u);
  EXPECT_TRUE(r.classes[0].ap.has_value());
  EXPECT_FALSE(r.classes[2].ap.has_value());
  EXPECT_FALSE(r.classes[2].auc.has_value());
  EXPECT_EQ(r.map_classes, (std::vector<int>{0, 1}));
  EXPECT_DOUBLE_EQ(r.map, (*r.classes[0].ap + *r.classes[1].ap) / 2);
  EXPECT_DOUBLE_EQ(r.classes[0].f1_threshold, 0.5);
  const EvaluationReport yr = evaluate(s, y, {F1Thresholds::kYouden, 0.5});
  EXPECT_DOUBLE_EQ(yr.classes[0].f1_threshold, *yr.classes[0].youden);

  const auto j = nlohmann::json::parse(to_json(r));
  EXPECT_EQ(j["title"], "run");
  EXPECT_TRUE(j["classes"][2]["ap"].is_null());
  EXPECT_TRUE(j["fairness"].is_null());
}

TEST(Curves, CsvHasOneRowPerUniqueScore) {
  const double s[] = {0.9, 0.4, 0.4, 0.1};
  const std::uint8_t y[] = {1, 0, 1, 0};
  const std::string csv = format_curve_csv(s, y);
  EXPECT_EQ(csv.rfind("threshold,precision,recall,tpr,fpr\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  const std::uint8_t none[] = {0, 0, 0, 0};
  EXPECT_TRUE(format_curve_csv(s, none).empty());
}

TEST(WriteReport, EmitsFiles) {
  ScoreMatrix s;
  LabelMatrix y;
  fill(s, y);
  const auto dir = std::filesystem::temp_directory_path() / "cxrlt_report_test";
  std::filesystem::remove_all(dir);
  write_report(dir, evaluate(s, y), s, y);
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "curves" / "0.csv"));
  EXPECT_FALSE(std::filesystem::exists(dir / "curves" / "2.csv"));
  std::ifstream svg(dir / "roc.svg");
  std::stringstream text;
  text << svg.rdbuf();
  EXPECT_EQ(text.str().rfind("<svg", 0), 0u);
  EXPECT_NE(text.str().find("AUC"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Svg, BarChartEscapesNames) {
  const std::string svg = ap_bar_svg({"a<b"}, {{"base", {0.5}}, {"ens", {0.7}}});
  EXPECT_NE(svg.find("a&lt;b"), std::string::npos);
  EXPECT_EQ(std::count(svg.begin(), svg.end(), '\n') > 3, true);
}

}  // namespace
}  // namespace cxrlt
