// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "liet/losses.hpp"
#include "liet/nets.hpp"
#include "liet/pipeline.hpp"
#include "liet/seeding.hpp"

namespace liet {

struct AblationFlags {
  bool no_aa = false;
  bool no_instance_norm = false;
  bool no_gray = false;
  bool no_ilc = false;
  bool with_smooth = false;

  PipelineSwitches switches() const;
};

struct TrainConfig {
  LossWeights weights;
  double lr_gen = 1e-4;
  double lr_disc = 1e-4;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  int64_t batch_size = 2;
  int64_t max_iters = 1000;
  uint64_t seed = 1;
  AblationFlags ablation;
  int64_t checkpoint_every = 500;  // 0 disables periodic checkpoints
  bool adversarial = true;         // false skips the discriminator phase and L^adv
  bool deterministic = true;

  void validate() const;
  /// Weights actually applied after ablation flags (no_aa zeroes AA,
  /// with_smooth turns a zero smoothing weight into 1).
  LossWeights effective_weights() const;
};

/// Raised when a loss term becomes NaN/Inf; carries the term name.
class NonFiniteLoss : public std::runtime_error {
 public:
  NonFiniteLoss(const std::string& term, double value);
  const std::string& term() const { return term_; }

 private:
  std::string term_;
};

/// Paired samples and the two unrelated domain pools, stacked as tensors.
struct TrainingData {
  torch::Tensor images;  // [N,3,H,W]
  torch::Tensor lidar;   // [N,1,H,W]
  torch::Tensor masks;   // [N,1,H,W]
  torch::Tensor albedo_pool;  // [A,3,H,W]
  torch::Tensor shade_pool;   // [B,3,H,W]

  static TrainingData from_samples(const std::vector<PairedSample>& samples,
                                   const std::vector<FeatureMap>& albedo_pool,
                                   const std::vector<FeatureMap>& shade_pool);
  int64_t size() const { return images.defined() ? images.size(0) : 0; }
};

struct StepOptions {
  /// Called after the generator-phase backward pass and before the generator
  /// step. Discriminator gradients are cleared by then, so every gradient
  /// present comes from the weighted generator objective.
  std::function<void(LietModel&)> after_backward;
};

class Trainer {
 public:
  Trainer(NetConfig net, TrainConfig train);

  /// Draws a batch: image indices, albedo indices and shade indices are all
  /// sampled independently.
  TrainingBatch sample_batch(const TrainingData& data);

  /// Discriminator phase on detached fakes, then generator phase on the
  /// weighted objective with discriminators frozen.
  LossReport train_step(const TrainingBatch& batch, const StepOptions& opts = {});

  LietModel& model() { return model_; }
  const NetConfig& net_config() const { return net_; }
  const TrainConfig& train_config() const { return train_; }
  int64_t iteration() const { return iteration_; }

  /// Serialized state: parameters, Adam moments, iteration, RNG, config.
  std::string encode_checkpoint(bool include_optimizer = true) const;
  void save_checkpoint(const std::filesystem::path& path, bool include_optimizer = true) const;
  /// Rebuilds a trainer from a checkpoint file. Throws LoadError on any
  /// malformation; nothing is constructed from a partially valid file.
  static std::unique_ptr<Trainer> load_checkpoint(const std::filesystem::path& path);
  static std::unique_ptr<Trainer> decode_checkpoint(const std::string& bytes,
                                                    const std::string& origin = "<memory>");

 private:
  void check_optimizer_disjointness() const;

  NetConfig net_;
  TrainConfig train_;
  LietModel model_{nullptr};
  std::unique_ptr<torch::optim::Adam> gen_opt_;
  std::unique_ptr<torch::optim::Adam> disc_opt_;
  std::vector<std::string> gen_param_names_;
  std::vector<std::string> disc_param_names_;
  int64_t iteration_ = 0;
  Rng rng_;
};

struct FitOptions {
  std::filesystem::path checkpoint_dir;  // empty: no checkpoint files
  std::ostream* log = nullptr;           // newline-delimited JSON LossReports
  std::function<void(const LossReport&)> on_step;
};

/// Runs from the trainer's current iteration up to max_iters. Checkpoints are
/// written as ckpt_<iter>.liet every checkpoint_every steps and at max_iters.
std::vector<LossReport> fit(Trainer& trainer, const TrainingData& data, const FitOptions& opts = {});

/// Convenience: seeds, builds a trainer and runs it to completion.
std::unique_ptr<Trainer> fit(const NetConfig& net, const TrainConfig& config, const TrainingData& data,
                             const FitOptions& opts = {});

}  // namespace liet
