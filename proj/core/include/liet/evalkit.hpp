// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <string>

#include "liet/dataset_io.hpp"
#include "liet/nets.hpp"
#include "liet/synthgen.hpp"

namespace liet {

/// Relation between two points predicted from a gray-scale image.
JudgmentLabel predict_relation(const torch::Tensor& gray, const Judgment& j, double delta);

/// Weighted fraction of judgments whose label disagrees with the relation
/// predicted from gray(albedo). albedo is [3,H,W].
double whdr(const torch::Tensor& albedo, const JudgmentSet& judgments, double delta = kDefaultDelta);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
};

/// Positive class: "an inequality exists". A true positive also needs the
/// predicted darker point to match. Weighted counts throughout.
PrecisionRecall prf(const torch::Tensor& albedo, const JudgmentSet& judgments, double delta = kDefaultDelta);

enum class EvalMode { RandomSampled, All };
std::string eval_mode_name(EvalMode m);
EvalMode eval_mode_from_name(const std::string& s);

struct EvalSettings {
  EvalMode mode = EvalMode::All;
  uint64_t sample_seed = 0;
  int64_t k_per_image = 50;
  double delta = kDefaultDelta;
};

struct EvalReport {
  double whdr = 0.0, precision = 0.0, recall = 0.0, f_score = 0.0;
  EvalMode mode = EvalMode::All;
  int64_t n_judgments = 0;
  double phy_residual = 0.0;
  std::optional<double> shadow_contrast;  // median over images with a usable shadow mask

  std::string to_json() const;
};

/// Mean |x_I - albedo * shade|.
double physical_consistency(const FeatureMap& x_i, const DecompositionResult& result);

/// mean(gray(albedo) | shadow) / mean(gray(albedo) | lit), computed inside
/// each constant-gt_albedo region and averaged with weights equal to the
/// region's shadowed pixel count. 1.0 means the shadow is gone from the albedo.
double shadow_contrast(const torch::Tensor& albedo, const torch::Tensor& gt_shadow_mask,
                       const torch::Tensor& gt_albedo);

using Decomposer = std::function<DecompositionResult(const PairedSample&)>;

/// Per-image metrics averaged over the dataset; F is recomputed from the
/// averaged precision and recall.
EvalReport evaluate_predictions(const Dataset& data, const Decomposer& decompose, const EvalSettings& settings);
EvalReport evaluate_model(LietModel& model, const Dataset& data, const EvalSettings& settings);

/// Judgment subset actually scored for image `index` under `settings`.
JudgmentSet select_judgments(const JudgmentSet& all, const EvalSettings& settings, size_t index);

}  // namespace liet
