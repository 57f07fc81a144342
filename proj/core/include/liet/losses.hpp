// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "liet/nets.hpp"

namespace liet {

// Every distance below is the mean absolute difference over all elements.
// Inputs may be [C,H,W] or batched; outputs are 0-dim tensors carrying
// autograd history.

struct LossWeights {
  double img = 100.0;
  double sty = 10.0;
  double cnt = 1.0;
  double kld = 1.0;
  double vgg = 1.0;
  double phy = 10.0;
  double aa = 100.0;
  double smooth = 0.0;

  void validate() const;
};

struct StyleDistribution {
  torch::Tensor mean;  // [D]
  torch::Tensor var;   // [D], >= kStyleVarFloor
};

inline constexpr double kStyleVarFloor = 1e-6;

/// Re-encoded code vs. the code it should reproduce.
struct CodePair {
  torch::Tensor reencoded;
  torch::Tensor target;
};

torch::Tensor mean_l1(const torch::Tensor& a, const torch::Tensor& b);

torch::Tensor loss_img(const torch::Tensor& x_ii, const torch::Tensor& x_i,
                       const torch::Tensor& x_ll, const torch::Tensor& x_l,
                       const torch::Tensor& x_rr, const torch::Tensor& x_r,
                       const torch::Tensor& x_ss, const torch::Tensor& x_s);

/// Sum of per-pair mean-L1 distances between style vectors.
torch::Tensor loss_style(std::span<const CodePair> pairs);
/// Sum of per-pair mean-L1 distances between content maps.
torch::Tensor loss_content(std::span<const CodePair> pairs);

/// Logistic discriminator objective for one (real, fake) pairing: average over
/// scales of mean softplus(-real) + mean softplus(fake).
torch::Tensor loss_adv_d(const std::vector<torch::Tensor>& real_scores,
                         const std::vector<torch::Tensor>& fake_scores);
/// Non-saturating generator objective: average over scales of mean softplus(-fake).
torch::Tensor loss_adv_g(const std::vector<torch::Tensor>& fake_scores);

/// Average over extractor layers of the per-layer mean-L1 feature distance.
torch::Tensor loss_vgg(PerceptualExtractor& extractor, const torch::Tensor& x_i,
                       const torch::Tensor& x_ri);

/// Per-dimension population mean/variance over a batch [N, D], N >= 2.
StyleDistribution fit_style_distribution(const torch::Tensor& codes);
/// Closed-form KL(p || q) for diagonal Gaussians, summed over dimensions.
torch::Tensor gaussian_kl(const StyleDistribution& p, const StyleDistribution& q);
torch::Tensor loss_kld(const StyleDistribution& q_ri, const StyleDistribution& q_r,
                       const StyleDistribution& q_si, const StyleDistribution& q_s);

torch::Tensor loss_phy(const torch::Tensor& x_i, const torch::Tensor& x_ri, const torch::Tensor& x_si);

struct AlbedoAlignmentOptions {
  bool grayscale = true;
  bool instance_norm = true;
};

/// Mask, gray-scale, instance-normalize over valid pixels, then mean-L1 over
/// valid pixels. The x_rl branch is detached. Returns 0 for an empty mask.
torch::Tensor loss_aa(const torch::Tensor& x_ri, const torch::Tensor& x_rl, const torch::Tensor& mask,
                      AlbedoAlignmentOptions opts = {});

/// Edge-aware total variation: |forward diff of x_ri| * exp(-|forward diff of x_i|),
/// averaged separately for horizontal and vertical differences and summed.
torch::Tensor loss_smooth(const torch::Tensor& x_ri, const torch::Tensor& x_i);

/// Components entering the weighted objective. Undefined tensors count as 0.
struct LossTerms {
  torch::Tensor adv;  // generator-side adversarial term
  torch::Tensor img, sty, cnt, kld, vgg, phy, aa, smooth;
};

/// adv + sum of weight * term. Terms with zero weight are skipped entirely so
/// they contribute neither value nor gradient.
torch::Tensor loss_total(const LossTerms& terms, const LossWeights& w);

struct LossReport {
  int64_t iter = 0;
  double adv_d = 0, adv_g = 0, img = 0, sty = 0, cnt = 0, kld = 0, vgg = 0, phy = 0, aa = 0,
         smooth = 0, total = 0;

  /// One line of the training log, keys in the fixed order of the log schema.
  std::string to_json_line() const;
  static LossReport from_json_line(const std::string& line);
  bool operator==(const LossReport&) const = default;
};

}  // namespace liet
