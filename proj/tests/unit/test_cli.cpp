// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

#include "liet/dataset_io.hpp"

namespace liet {
namespace {
namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd = std::string(LIET_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root = fs::temp_directory_path() / "liet_cli_test";
    fs::remove_all(root);
    fs::create_directories(root);
  }
  static void TearDownTestSuite() { fs::remove_all(root); }
  static fs::path root;
};
fs::path CliTest::root;

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("infer --ckpt /nonexistent --image x --albedo a --shade s"), 1);
  EXPECT_EQ(run("eval --ckpt x --data y --mode sometimes --report r"), 1);
}

TEST_F(CliTest, BadConfigExitsOne) {
  std::ofstream(root / "bad.json") << R"({"train":{"lr_gen":-1}})";
  fs::create_directories(root / "empty");
  EXPECT_EQ(run("train --config " + (root / "bad.json").string() + " --data " + (root / "empty").string() +
                " --out " + (root / "bad_run").string()),
            1);
}

TEST_F(CliTest, EndToEnd) {
  const auto data = root / "data";
  ASSERT_EQ(run("generate-data --out " + data.string() + " --n 3 --seed 5 --size 64"), 0);
  ASSERT_TRUE(fs::exists(data / "manifest.json"));
  EXPECT_EQ(read_dataset(data).samples.size(), 3u);

  std::ofstream(root / "cfg.json")
      << R"({"net":{"style_dim":4,"content_channels":16,"n_res_blocks":1,"disc_scales":2,"mlp_hidden":16,"base_channels":4},
             "train":{"max_iters":3,"checkpoint_every":2}})";
  const auto run_dir = root / "run";
  ASSERT_EQ(run("train --config " + (root / "cfg.json").string() + " --data " + data.string() + " --out " +
                run_dir.string() + " --ablation no_inst"),
            0);
  for (const char* f : {"resolved_config.json", "train_log.jsonl", "ckpt_2.liet", "ckpt_3.liet", "final.liet"})
    EXPECT_TRUE(fs::exists(run_dir / f)) << f;
  {
    std::ifstream in(run_dir / "resolved_config.json");
    auto j = nlohmann::json::parse(in);
    EXPECT_TRUE(j["train"]["ablation"]["no_instance_norm"].get<bool>());
    std::ifstream log(run_dir / "train_log.jsonl");
    int lines = 0;
    for (std::string l; std::getline(log, l);) ++lines;
    EXPECT_EQ(lines, 3);
  }

  const auto ckpt = (run_dir / "final.liet").string();
  const auto img = (data / "scene_0000_image.png").string();
  ASSERT_EQ(run("infer --ckpt " + ckpt + " --image " + img + " --albedo " + (root / "a.png").string() + " --shade " +
                (root / "s.png").string()),
            0);
  auto a = read_png(root / "a.png");
  EXPECT_EQ(a.sizes(), (std::vector<int64_t>{3, 64, 64}));
  EXPECT_EQ(read_png(root / "s.png").sizes(), a.sizes());

  ASSERT_EQ(run("eval --ckpt " + ckpt + " --data " + data.string() + " --mode random --k 10 --seed 2 --report " +
                (root / "rep.json").string()),
            0);
  std::ifstream in(root / "rep.json");
  auto rep = nlohmann::json::parse(in);
  EXPECT_EQ(rep["mode"], "random_sampled");
  EXPECT_EQ(rep["n_judgments"], 30);
  EXPECT_GE(rep["whdr"].get<double>(), 0.0);
  EXPECT_LE(rep["whdr"].get<double>(), 1.0);

  EXPECT_EQ(run("eval --ckpt " + (data / "manifest.json").string() + " --data " + data.string() +
                " --mode all --report " + (root / "rep2.json").string()),
            2);
}

}  // namespace
}  // namespace liet
