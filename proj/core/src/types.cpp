// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#include "liet/types.hpp"

namespace liet {

FeatureMap::FeatureMap(torch::Tensor data, ValueRange range) : data_(std::move(data)), range_(range) {
  require(data_.defined(), "FeatureMap: undefined tensor");
  require(data_.dim() == 3, "FeatureMap: expected rank-3 [C,H,W] tensor");
  require(data_.size(0) >= 1 && data_.size(1) >= 1 && data_.size(2) >= 1,
          "FeatureMap: every dimension must be >= 1");
  require(torch::isfinite(data_).all().item<bool>(), "FeatureMap: non-finite value");
  if (range_ == ValueRange::Unit) {
    require(data_.min().item<double>() >= 0.0 && data_.max().item<double>() <= 1.0,
            "FeatureMap: unit-tagged map has values outside [0,1]");
  }
}

LidarMap LidarMap::make(torch::Tensor intensity, torch::Tensor mask) {
  require(intensity.dim() == 3 && intensity.size(0) == 1, "LidarMap: intensity must be [1,H,W]");
  require(mask.sizes() == intensity.sizes(), "LidarMap: mask and intensity shapes differ");
  auto binary = (mask > 0.5).to(intensity.scalar_type());
  require(binary.sum().item<double>() > 0.0, "LidarMap: mask coverage must be > 0");
  return LidarMap{FeatureMap(intensity * binary, ValueRange::Unit), binary};
}

double LidarMap::coverage() const { return mask.mean().item<double>(); }

}  // namespace liet
