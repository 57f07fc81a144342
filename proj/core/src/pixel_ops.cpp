// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#include "liet/pixel_ops.hpp"

namespace liet {
namespace {

void require_spatial(const torch::Tensor& t, const char* who) {
  if (t.dim() != 3 && t.dim() != 4) {
    throw ContractViolation(std::string(who) + ": expected [C,H,W] or [N,C,H,W] tensor");
  }
}

int64_t channel_dim(const torch::Tensor& t) { return t.dim() - 3; }

}  // namespace

torch::Tensor to_grayscale(const torch::Tensor& img) {
  require_spatial(img, "to_grayscale");
  const auto cd = channel_dim(img);
  require(img.size(cd) == 3, "to_grayscale: input must have 3 channels");
  return kGrayR * img.narrow(cd, 0, 1) + kGrayG * img.narrow(cd, 1, 1) +
         kGrayB * img.narrow(cd, 2, 1);
}

FeatureMap to_grayscale(const FeatureMap& img) {
  return FeatureMap(to_grayscale(img.tensor()), img.range());
}

torch::Tensor apply_mask(const torch::Tensor& map, const torch::Tensor& mask) {
  require_spatial(map, "apply_mask");
  require_spatial(mask, "apply_mask");
  require(map.size(-1) == mask.size(-1) && map.size(-2) == mask.size(-2),
          "apply_mask: spatial dims of map and mask differ");
  require(mask.size(channel_dim(mask)) == 1, "apply_mask: mask must be single channel");
  if (mask.dim() == 4 && map.dim() == 4) {
    require(mask.size(0) == map.size(0) || mask.size(0) == 1, "apply_mask: batch size mismatch");
  }
  return map * mask.to(map.scalar_type());
}

FeatureMap apply_mask(const FeatureMap& map, const torch::Tensor& mask) {
  return FeatureMap(apply_mask(map.tensor(), mask), map.range());
}

torch::Tensor instance_normalize(const torch::Tensor& map, double eps) {
  require_spatial(map, "instance_normalize");
  require(map.size(-1) * map.size(-2) >= 2, "instance_normalize: need at least 2 pixels");
  const auto mean = map.mean({-2, -1}, /*keepdim=*/true);
  const auto var = (map - mean).pow(2).mean({-2, -1}, /*keepdim=*/true);
  return (map - mean) / torch::sqrt(var + eps);
}

FeatureMap instance_normalize(const FeatureMap& map, double eps) {
  return FeatureMap(instance_normalize(map.tensor(), eps), ValueRange::Free);
}

torch::Tensor masked_instance_normalize(const torch::Tensor& map, const torch::Tensor& mask,
                                        double eps) {
  const auto m = mask.to(map.scalar_type());
  const auto masked = apply_mask(map, m);
  const auto count = m.sum({-2, -1}, /*keepdim=*/true);
  const auto safe_count = count.clamp_min(1.0);
  const auto mean = masked.sum({-2, -1}, /*keepdim=*/true) / safe_count;
  const auto centered = (map - mean) * m;
  const auto var = centered.pow(2).sum({-2, -1}, /*keepdim=*/true) / safe_count;
  return centered / torch::sqrt(var + eps);
}

}  // namespace liet
