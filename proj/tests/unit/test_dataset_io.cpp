// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <functional>
#include <fstream>
#include <json.hpp>

#include "liet/dataset_io.hpp"

namespace liet {
namespace {
namespace fs = std::filesystem;

class DatasetIoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("liet_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  void edit_manifest(const std::function<void(nlohmann::json&)>& f) {
    nlohmann::json m;
    {
      std::ifstream in(dir / "manifest.json");
      m = nlohmann::json::parse(in);
    }
    f(m);
    std::ofstream(dir / "manifest.json") << m.dump();
  }

  fs::path dir;
};

TEST_F(DatasetIoTest, Png8BitRoundTripWithinQuantization) {
  auto t = torch::rand({3, 9, 7});
  write_png(dir / "a.png", t, 8);
  auto r = read_png(dir / "a.png");
  ASSERT_EQ(r.sizes(), t.sizes());
  EXPECT_LE((r - t).abs().max().item<float>(), 0.5f / 255 + 1e-6f);
}

TEST_F(DatasetIoTest, Png16BitRoundTripWithinQuantization) {
  auto t = torch::rand({1, 5, 6});
  write_png(dir / "g.png", t, 16);
  auto r = read_png(dir / "g.png");
  ASSERT_EQ(r.sizes(), t.sizes());
  EXPECT_LE((r - t).abs().max().item<float>(), 0.5f / 65535 + 1e-6f);
}

TEST_F(DatasetIoTest, PngRejectsBadInput) {
  EXPECT_THROW(write_png(dir / "x.png", torch::rand({2, 4, 4}), 8), ContractViolation);
  EXPECT_THROW(write_png(dir / "x.png", torch::rand({3, 4, 4}), 12), ContractViolation);
  std::ofstream(dir / "junk.png") << "not a png";
  try {
    read_png(dir / "junk.png");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("junk.png"), std::string::npos);
  }
  EXPECT_THROW(read_png(dir / "absent.png"), LoadError);
}

TEST_F(DatasetIoTest, DatasetRoundTrip) {
  SceneSpec spec;
  spec.size = 32;
  auto data = make_synthetic_dataset(spec, 3, 4, 20);
  write_dataset(dir, data);
  auto back = read_dataset(dir);
  ASSERT_EQ(back.samples.size(), 3u);
  ASSERT_EQ(back.judgments.size(), 3u);
  for (size_t i = 0; i < 3; ++i) {
    const auto& a = data.samples[i];
    const auto& b = back.samples[i];
    EXPECT_EQ(a.sample_id, b.sample_id);
    EXPECT_LE((a.image.tensor() - b.image.tensor()).abs().max().item<float>(), 1.0f / 255);
    EXPECT_LE((a.gt_albedo->tensor() - b.gt_albedo->tensor()).abs().max().item<float>(), 1.0f / 255);
    EXPECT_LE((a.gt_shade->tensor() - b.gt_shade->tensor()).abs().max().item<float>(), 1.0f / 255);
    EXPECT_LE((a.lidar.intensity.tensor() - b.lidar.intensity.tensor()).abs().max().item<float>(), 1.0f / 65535);
    EXPECT_TRUE(torch::equal(a.lidar.mask, b.lidar.mask));
    EXPECT_TRUE(torch::equal(*a.gt_shadow_mask, *b.gt_shadow_mask));
    ASSERT_EQ(data.judgments[i].size(), back.judgments[i].size());
    for (size_t k = 0; k < data.judgments[i].size(); ++k) {
      EXPECT_EQ(data.judgments[i][k].label, back.judgments[i][k].label);
      EXPECT_EQ(data.judgments[i][k].xa, back.judgments[i][k].xa);
      EXPECT_DOUBLE_EQ(data.judgments[i][k].weight, back.judgments[i][k].weight);
    }
  }
  EXPECT_EQ(back.albedo_pool.ids, data.albedo_pool.ids);
  EXPECT_EQ(back.shade_pool.maps.size(), 3u);
}

TEST_F(DatasetIoTest, ManifestCountMatchesDirectory) {
  SceneSpec spec;
  spec.size = 16;
  write_dataset(dir, make_synthetic_dataset(spec, 4, 1, 5));
  std::ifstream in(dir / "manifest.json");
  auto m = nlohmann::json::parse(in);
  EXPECT_EQ(m["version"], 1);
  EXPECT_EQ(m["samples"].size(), 4u);
  int images = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename().string().ends_with("_image.png")) ++images;
  EXPECT_EQ(images, 4);
}

TEST_F(DatasetIoTest, MissingFileEntryIsNamed) {
  SceneSpec spec;
  spec.size = 16;
  write_dataset(dir, make_synthetic_dataset(spec, 2, 1, 5));
  edit_manifest([](nlohmann::json& m) { m["samples"][1]["files"].erase("lidar"); });
  try {
    read_dataset(dir);
    FAIL();
  } catch (const LoadError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("manifest.json"), std::string::npos);
    EXPECT_NE(msg.find("lidar"), std::string::npos);
  }
}

TEST_F(DatasetIoTest, MissingFileOnDiskIsNamed) {
  SceneSpec spec;
  spec.size = 16;
  write_dataset(dir, make_synthetic_dataset(spec, 2, 1, 5));
  fs::remove(dir / "scene_0001_albedo.png");
  try {
    read_dataset(dir);
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("scene_0001_albedo.png"), std::string::npos);
  }
}

TEST_F(DatasetIoTest, BadVersionAndJudgments) {
  SceneSpec spec;
  spec.size = 16;
  write_dataset(dir, make_synthetic_dataset(spec, 1, 1, 5));
  edit_manifest([](nlohmann::json& m) { m["version"] = 7; });
  EXPECT_THROW(read_dataset(dir), LoadError);
  edit_manifest([](nlohmann::json& m) { m["version"] = 1; });
  EXPECT_NO_THROW(read_dataset(dir));
  {
    std::ofstream(dir / "scene_0000_judgments.json")
        << R"([{"a":[0,0],"b":[99,0],"label":"equal","weight":1.0}])";
  }
  try {
    read_dataset(dir);
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("scene_0000_judgments.json"), std::string::npos);
  }
  fs::remove(dir / "manifest.json");
  EXPECT_THROW(read_dataset(dir), LoadError);
}

}  // namespace
}  // namespace liet
