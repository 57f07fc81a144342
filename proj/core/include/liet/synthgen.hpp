// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "liet/types.hpp"

namespace liet {

struct Range {
  double lo = 0.0, hi = 0.0;
};
struct IntRange {
  int64_t lo = 0, hi = 0;
};

/// Procedural Lambertian scene parameters. Every range is sampled once per scene.
struct SceneSpec {
  int64_t size = 64;
  IntRange n_shapes{3, 8};
  IntRange shadow_count{1, 3};
  Range shadow_attenuation{0.2, 0.7};
  /// Highest spatial frequency of the smooth shading field, in cycles per image.
  double shade_smoothness = 1.5;
  Range lidar_coverage{0.3, 0.6};
  double lidar_noise_sigma = 0.01;
  Range lidar_gamma{0.7, 1.4};
  uint64_t seed = 0;

  void validate() const;
};

/// Ground truth the sample itself does not carry.
struct SceneInfo {
  double shadow_attenuation = 1.0;
  double lidar_gamma = 1.0;
  double lidar_coverage = 0.0;
  torch::Tensor region_labels;  // [H,W] int64, one id per constant-albedo region
};

struct GeneratedScene {
  PairedSample sample;
  SceneInfo info;
};

/// Deterministic in (spec, spec.seed). The LiDAR intensity is a function of
/// albedo and sensor noise only, never of shading or shadows.
GeneratedScene generate_scene_with_info(const SceneSpec& spec, const std::string& sample_id);
PairedSample generate_scene(const SceneSpec& spec);

/// Scenes for seeds derive_seed(base_seed, i), ids "scene_0000", ...
std::vector<GeneratedScene> generate_scenes(const SceneSpec& spec, int64_t n, uint64_t base_seed);

// ---------------------------------------------------------------------------
// Pairwise reflectance annotations
// ---------------------------------------------------------------------------

enum class JudgmentLabel { ADarker, BDarker, Equal };

struct Judgment {
  int64_t ya = 0, xa = 0;  // point a (row, col)
  int64_t yb = 0, xb = 0;  // point b
  JudgmentLabel label = JudgmentLabel::Equal;
  double weight = 1.0;
};

using JudgmentSet = std::vector<Judgment>;

inline constexpr double kDefaultDelta = 1.10;

/// a darker when gray_b / gray_a > delta, b darker when gray_a / gray_b > delta,
/// equal otherwise.
JudgmentLabel relation_from_gray(double gray_a, double gray_b, double delta);

std::string label_name(JudgmentLabel l);
JudgmentLabel label_from_name(const std::string& s);

/// Samples `n_pairs` point pairs (part of them local, so equal judgments occur)
/// and labels them from gray(gt_albedo). Pairs whose brightness ratio lies
/// within a relative `equal_band` of delta are rejected, so small quantization
/// of the albedo cannot flip a label. Weights are uniform in [0.5, 2].
JudgmentSet generate_annotations(const PairedSample& sample, int64_t n_pairs, double delta,
                                 double equal_band, uint64_t seed);

// ---------------------------------------------------------------------------
// Unpaired albedo / shade domain pools
// ---------------------------------------------------------------------------

enum class PoolKind { Albedo, Shade };

struct DomainPool {
  PoolKind kind = PoolKind::Albedo;
  std::vector<std::string> ids;  // "albedo_0000" / "shade_0000"
  std::vector<FeatureMap> maps;
};

/// Albedo maps are piecewise constant; shade maps are smooth positive fields,
/// some with hard shadow steps. Unrelated to any paired scene.
DomainPool generate_domain_pool(PoolKind kind, int64_t n, uint64_t seed, const SceneSpec& spec = {});

}  // namespace liet
