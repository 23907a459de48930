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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cxrlt/cli.hpp"
#include "cxrlt/datakit.hpp"
#include "cxrlt/model.hpp"
#include "cxrlt/training.hpp"

namespace cxrlt {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cxrlt");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cxrlt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
  }

  std::string data() {
    write("synth.json", R"({"num_samples": 160, "num_classes": 4, "image_size": 16, "seed": 5})");
    const CliResult r = cli({"synth", "--config", path("synth.json"), "--out", path("data")});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    return path("data");
  }

  std::string tiny_model() {
    ModelConfig c;
    c.image_size = 16;
    c.backbone.widths = {4, 8};
    c.backbone.spatial_stride = 4;
    c.decoder.embed_dim = 16;
    c.decoder.num_heads = 2;
    c.decoder.ff_dim = 16;
    write("model.json", to_json(c));
    return path("model.json");
  }

  fs::path dir_;
};

TEST_F(CliTest, HelpExitsZero) {
  const CliResult r = cli({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("train"), std::string::npos);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({}).code, kExitConfig);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitConfig);
  EXPECT_EQ(cli({"train"}).code, kExitConfig);
  EXPECT_EQ(cli({"train", "--out", path("x"), "--branch", "middle"}).code, kExitConfig);
}

TEST_F(CliTest, MissingInputsFailBeforeWork) {
  const CliResult r = cli({"train", "--data", path("nowhere"), "--out", path("ck")});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("manifest.csv"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("ck")));
}

TEST_F(CliTest, UnknownOverrideKeyIsConfigError) {
  const std::string d = data();
  const CliResult r = cli({"train", "--data", d, "--set", "bogus=1", "--out", path("ck")});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("bogus"), std::string::npos);
}

TEST_F(CliTest, InvalidConfigValueIsConfigError) {
  const std::string d = data();
  EXPECT_EQ(cli({"train", "--data", d, "--set", "batch_size=0", "--out", path("ck")}).code, kExitConfig);
  EXPECT_EQ(cli({"train", "--data", d, "--set", "learning_rate=abc", "--out", path("ck")}).code, kExitConfig);
}

TEST_F(CliTest, ImageSizeMismatchIsConfigError) {
  const std::string d = data();
  write("big.json", R"({"image_size": 32})");
  const CliResult r = cli({"train", "--data", d, "--model-config", path("big.json"), "--out", path("ck")});
  EXPECT_EQ(r.code, kExitConfig) << r.err;
}

TEST_F(CliTest, SynthWritesDataset) {
  const std::string d = data();
  EXPECT_TRUE(fs::exists(fs::path(d) / "manifest.csv"));
  EXPECT_TRUE(fs::exists(fs::path(d) / "images.bin"));
  EXPECT_TRUE(fs::exists(fs::path(d) / "synth.json"));
  EXPECT_EQ(load_manifest(fs::path(d) / "manifest.csv").size(), 160u);
}

TEST_F(CliTest, ResampleWritesTrainManifest) {
  const std::string d = data();
  ASSERT_EQ(cli({"resample", "--data", d, "--kind", "ros", "--seed", "3", "--out", path("ros.csv")}).code, kExitOk);
  const DatasetManifest m = load_manifest(path("ros.csv"));
  const DatasetManifest orig = load_manifest(fs::path(d) / "manifest.csv");
  EXPECT_GE(m.size(), orig.select(Split::kTrain).size());
  ASSERT_EQ(cli({"resample", "--data", d, "--kind", "ros", "--seed", "3", "--out", path("ros2.csv")}).code, kExitOk);
  std::ifstream a(path("ros.csv")), b(path("ros2.csv"));
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
}

TEST_F(CliTest, FullPipeline) {
  const std::string d = data();
  const std::string model = tiny_model();
  for (const std::string b : {"all", "head", "tail"}) {
    const CliResult r = cli({"train", "--data", d, "--model-config", model, "--branch", b, "--set", "epochs=1", "--set",
                       "learning_rate=1e-3", "--out", path("ck_" + b)});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("epoch 0"), std::string::npos);
  }
  const Checkpoint all = load_checkpoint(path("ck_all"));
  EXPECT_EQ(all.branch, Branch::kAll);
  EXPECT_EQ(all.class_indices.size(), 4u);

  CliResult r = cli({"eval", "--data", d, "--checkpoint", path("ck_all"), "--checkpoint", path("ck_head"), "--checkpoint",
               path("ck_tail"), "--ensemble", "--fairness", "gender", "--out", path("rep")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("mAP"), std::string::npos);
  EXPECT_NE(r.out.find("EO (gender"), std::string::npos);
  for (const char* f : {"report.json", "roc.svg", "ap.svg", "scores.csv"}) {
    EXPECT_TRUE(fs::exists(fs::path(path("rep")) / f)) << f;
  }

  for (const std::string b : {"all", "head", "tail"}) {
    ASSERT_EQ(cli({"predict", "--data", d, "--checkpoint", path("ck_" + b), "--out", path(b + ".csv")}).code, kExitOk);
  }
  r = cli({"combine", "--all", path("all.csv"), "--head", path("head.csv"), "--tail", path("tail.csv"), "--out",
           path("combined.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream combined(path("combined.csv")), ensemble(fs::path(path("rep")) / "scores.csv");
  std::stringstream sc, se;
  sc << combined.rdbuf();
  se << ensemble.rdbuf();
  EXPECT_EQ(sc.str(), se.str());

  r = cli({"gradcam", "--data", d, "--checkpoint", path("ck_all"), "--sample", "s000", "--class", "1", "--out",
           path("cam.ppm")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream ppm(path("cam.ppm"));
  std::string magic;
  ppm >> magic;
  EXPECT_EQ(magic, "P6");
  EXPECT_EQ(cli({"gradcam", "--data", d, "--checkpoint", path("ck_head"), "--sample", "nope", "--class", "0", "--out",
                 path("x.ppm")})
                .code,
            kExitConfig);

  ASSERT_EQ(cli({"resample", "--data", d, "--kind", "crt", "--out", path("crt.csv")}).code, kExitOk);
  r = cli({"retrain", "--data", d, "--checkpoint", path("ck_all"), "--resampled", path("crt.csv"), "--set",
           "epochs=1", "--out", path("rt")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(fs::path(path("rt")) / "set_0" / "index.json"));
}

TEST_F(CliTest, SingleCheckpointEvalWithYouden) {
  const std::string d = data();
  ASSERT_EQ(cli({"train", "--data", d, "--model-config", tiny_model(), "--set", "epochs=1", "--quiet", "--out",
                 path("ck")})
                .code,
            kExitOk);
  const CliResult r = cli({"eval", "--data", d, "--checkpoint", path("ck"), "--f1-thresholds", "youden", "--split", "all",
                     "--out", path("rep")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(cli({"eval", "--data", d, "--checkpoint", path("ck"), "--ensemble", "--out", path("rep2")}).code,
            kExitConfig);
}

}  // namespace
}  // namespace cxrlt
