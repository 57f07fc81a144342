// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "liet/types.hpp"

namespace liet {

inline constexpr double kInstanceNormEps = 1e-5;

// ITU-R BT.601 luma weights.
inline constexpr double kGrayR = 0.299;
inline constexpr double kGrayG = 0.587;
inline constexpr double kGrayB = 0.114;

// All primitives accept [C,H,W] or batched [N,C,H,W] tensors and are
// differentiable through libtorch autograd.

/// Weighted luminance. Input channel dim must be 3; output keeps the rank
/// with a single channel.
torch::Tensor to_grayscale(const torch::Tensor& img);
FeatureMap to_grayscale(const FeatureMap& img);

/// Elementwise product with a single-channel mask broadcast over channels.
torch::Tensor apply_mask(const torch::Tensor& map, const torch::Tensor& mask);
FeatureMap apply_mask(const FeatureMap& map, const torch::Tensor& mask);

/// Per-channel standardization over the spatial dims (biased variance).
torch::Tensor instance_normalize(const torch::Tensor& map, double eps = kInstanceNormEps);
FeatureMap instance_normalize(const FeatureMap& map, double eps = kInstanceNormEps);

/// Instance normalization whose statistics are taken only over pixels where
/// mask is 1. Output is zero outside the mask. A channel with an empty mask
/// normalizes to all zeros.
torch::Tensor masked_instance_normalize(const torch::Tensor& map, const torch::Tensor& mask,
                                        double eps = kInstanceNormEps);

}  // namespace liet
