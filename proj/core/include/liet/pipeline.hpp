// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "liet/losses.hpp"
#include "liet/nets.hpp"

namespace liet {

/// Structural switches for the ablation matrix.
struct PipelineSwitches {
  bool albedo_alignment = true;  // false: w/o AA
  bool aa_instance_norm = true;  // false: w/o inst.
  bool aa_grayscale = true;      // false: w/o gray
  bool ilc_paths = true;         // false: w/o ILC paths
};

struct ImagePathOutputs {
  torch::Tensor x_ri, x_si;
  std::optional<torch::Tensor> x_li;
  StyleCode p_i;
  ContentCode c_i;
  MappedStyles styles;  // albedo = p_RI, shade = p_SI, cross = p_LI
};

struct LidarPathOutputs {
  torch::Tensor x_rl, x_sl;
  std::optional<torch::Tensor> x_il;
  StyleCode p_l;
  ContentCode c_l;
  MappedStyles styles;  // albedo = p_RL, shade = p_SL, cross = p_IL
};

/// G_X(E^c_X(x), E^p_X(x)). `mask` is only consulted for domain L.
torch::Tensor reconstruct_within(LietModel& model, DomainId domain, const torch::Tensor& x,
                                 const std::optional<torch::Tensor>& mask = std::nullopt);

/// Image encoders, f_I, then G_R / G_S (and G_L when `with_lidar_translation`)
/// all fed the same content code.
ImagePathOutputs forward_image_path(LietModel& model, const torch::Tensor& x_i,
                                    bool with_lidar_translation);

LidarPathOutputs forward_lidar_path(LietModel& model, const torch::Tensor& x_l,
                                    const torch::Tensor& m_l, bool with_image_translation);

struct TrainingBatch {
  torch::Tensor x_i;  // [N,3,H,W]
  torch::Tensor x_l;  // [N,1,H,W], zero where m_l = 0
  torch::Tensor m_l;  // [N,1,H,W]
  torch::Tensor x_r;  // [M,3,H,W] albedo-domain samples, unrelated to x_i
  torch::Tensor x_s;  // [M,3,H,W] shade-domain samples, unrelated to x_i
};

/// Named re-encoding pair for the style/content consistency terms.
struct NamedCodePair {
  std::string name;
  CodePair pair;
};

/// Every intermediate the losses need for one step.
struct ForwardBundle {
  TrainingBatch inputs;
  torch::Tensor x_ii, x_ll, x_rr, x_ss;
  ImagePathOutputs image;
  LidarPathOutputs lidar;
  StyleCode p_r, p_s;  // style codes of the albedo/shade domain batches
  std::vector<NamedCodePair> style_pairs;
  std::vector<NamedCodePair> content_pairs;

  /// Names of populated tensor fields, for completeness audits.
  std::vector<std::string> populated_fields() const;
};

ForwardBundle training_forward(LietModel& model, const TrainingBatch& batch,
                               const PipelineSwitches& switches);

/// One (real, fake) pairing of the adversarial objective.
struct AdversarialPairing {
  DomainId domain;
  std::string fake_name;
  torch::Tensor real;
  torch::Tensor fake;
};

/// The six pairings (four without ILC paths). LiDAR-domain fakes are masked
/// with the paired validity mask so they are compared against sparse real
/// intensity on equal terms.
std::vector<AdversarialPairing> adversarial_pairings(const ForwardBundle& bundle,
                                                     const PipelineSwitches& switches);

/// Uses only E^p_I, E^c_I, f_I, G_R, G_S. x_i is [N,3,H,W] with H, W divisible by 4.
struct BatchDecomposition {
  torch::Tensor albedo, shade;
};
BatchDecomposition infer_batch(LietModel& model, const torch::Tensor& x_i);
DecompositionResult infer(LietModel& model, const FeatureMap& x_i);

}  // namespace liet
