// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "liet/synthgen.hpp"

namespace liet {

/// Writes a unit-range [C,H,W] tensor (C = 1 or 3) as PNG at 8 or 16 bits.
void write_png(const std::filesystem::path& path, const torch::Tensor& map, int bit_depth);
/// Reads a gray or RGB PNG (8/16 bit) into a float32 [C,H,W] tensor in [0,1].
torch::Tensor read_png(const std::filesystem::path& path);

struct Dataset {
  std::vector<PairedSample> samples;
  std::vector<JudgmentSet> judgments;  // parallel to samples; may be empty per sample
  DomainPool albedo_pool{PoolKind::Albedo, {}, {}};
  DomainPool shade_pool{PoolKind::Shade, {}, {}};
};

inline constexpr int kManifestVersion = 1;

/// Layout: manifest.json plus per-sample PNGs (8-bit RGB image/albedo/shade,
/// 16-bit gray LiDAR intensity, 8-bit {0,255} masks) and judgment JSON files.
void write_dataset(const std::filesystem::path& dir, const Dataset& data);
/// Throws LoadError naming the offending file on any inconsistency.
Dataset read_dataset(const std::filesystem::path& dir);

/// Generates `n` scenes, pools of `n` albedo and `n` shade maps and
/// `n_pairs` judgments per scene.
Dataset make_synthetic_dataset(const SceneSpec& spec, int64_t n, uint64_t seed, int64_t n_pairs = 100,
                               double delta = kDefaultDelta, double equal_band = 0.05);

}  // namespace liet
