// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <torch/torch.h>

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace liet {

/// Raised when a caller breaks an operation's precondition (shape, channel
/// count, value range). Never used for I/O problems.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by any loader (checkpoint, dataset, config) on malformed input.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value; the message names the offending key path
/// (e.g. "train.lr_gen").
class ConfigError : public LoadError {
 public:
  using LoadError::LoadError;
};

inline void require(bool cond, std::string_view what) {
  if (!cond) throw ContractViolation(std::string(what));
}

enum class DomainId { I = 0, L = 1, R = 2, S = 3 };

inline constexpr std::array<DomainId, 4> kAllDomains{DomainId::I, DomainId::L, DomainId::R,
                                                     DomainId::S};

constexpr std::string_view domain_name(DomainId d) {
  switch (d) {
    case DomainId::I: return "I";
    case DomainId::L: return "L";
    case DomainId::R: return "R";
    case DomainId::S: return "S";
  }
  return "?";
}

/// Number of image channels a domain carries. LiDAR intensity is single channel.
constexpr int64_t domain_channels(DomainId d) { return d == DomainId::L ? 1 : 3; }

enum class ValueRange { Unit, Free };

/// Dense [C, H, W] map. Channel-first everywhere in this library; batched
/// tensors handed to the networks are [N, C, H, W].
class FeatureMap {
 public:
  FeatureMap() = default;
  explicit FeatureMap(torch::Tensor data, ValueRange range = ValueRange::Free);

  const torch::Tensor& tensor() const { return data_; }
  ValueRange range() const { return range_; }
  int64_t channels() const { return data_.size(0); }
  int64_t height() const { return data_.size(1); }
  int64_t width() const { return data_.size(2); }
  bool defined() const { return data_.defined(); }

 private:
  torch::Tensor data_;
  ValueRange range_ = ValueRange::Free;
};

/// Sparse LiDAR intensity registered to the image grid. Pixels with mask 0
/// store intensity 0.
struct LidarMap {
  FeatureMap intensity;  // [1, H, W], unit
  torch::Tensor mask;    // [1, H, W], values in {0, 1}

  static LidarMap make(torch::Tensor intensity, torch::Tensor mask);
  double coverage() const;
};

struct PairedSample {
  std::string sample_id;
  FeatureMap image;  // [3, H, W], unit
  LidarMap lidar;
  std::optional<FeatureMap> gt_albedo;
  std::optional<FeatureMap> gt_shade;
  std::optional<torch::Tensor> gt_shadow_mask;  // [1, H, W], {0, 1}

  int64_t height() const { return image.height(); }
  int64_t width() const { return image.width(); }
};

/// Global style vectors, batched as [N, style_dim].
struct StyleCode {
  torch::Tensor vec;
  int64_t dim() const { return vec.size(-1); }
};

/// Spatial content codes, batched as [N, C_c, H/4, W/4].
struct ContentCode {
  torch::Tensor map;
};

struct DecompositionResult {
  FeatureMap albedo;  // [3, H, W], unit
  FeatureMap shade;   // [3, H, W], unit
};

}  // namespace liet
