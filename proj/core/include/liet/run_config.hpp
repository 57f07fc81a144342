// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "liet/evalkit.hpp"
#include "liet/nets.hpp"
#include "liet/synthgen.hpp"
#include "liet/trainer.hpp"

namespace liet {

struct DataConfig {
  SceneSpec scene;
  int64_t n_samples = 32;
  int64_t n_pairs = 100;
  double delta = kDefaultDelta;
  double equal_band = 0.05;
  std::string dir;  // dataset directory; empty means "given on the command line"
};

/// Declarative run description: {"net":{...},"train":{...},"data":{...},"eval":{...}}.
struct RunConfig {
  NetConfig net;
  TrainConfig train;
  DataConfig data;
  EvalSettings eval;
};

inline constexpr const char* kResolvedConfigName = "resolved_config.json";

/// Parses and validates; missing keys take their defaults. Throws ConfigError
/// naming the key path on unknown keys, type mismatches and range violations.
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
RunConfig parse_config(const std::filesystem::path& path);

/// Fully materialized JSON (every default written out).
std::string to_json_text(const RunConfig& cfg);
/// Writes `resolved_config.json` into `dir` and returns its path.
std::filesystem::path write_resolved_config(const RunConfig& cfg, const std::filesystem::path& dir);

}  // namespace liet
