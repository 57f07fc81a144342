// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <atomic>
#include <optional>
#include <string>
#include <vector>

#include "liet/types.hpp"

namespace liet {

struct NetConfig {
  int64_t style_dim = 8;
  int64_t content_channels = 64;
  int64_t downsample_factor = 4;
  int64_t n_res_blocks = 2;
  int64_t disc_scales = 3;
  int64_t mlp_hidden = 64;
  int64_t base_channels = 16;  // width of the first conv in encoders/discriminators
  uint64_t perceptual_seed = 19;

  void validate() const;
};

/// Per-channel affine re-statistics: gamma * (f - mean) / sqrt(var + eps) + beta.
/// features [N,C,H,W], gamma/beta [N,C].
torch::Tensor adain(const torch::Tensor& features, const torch::Tensor& gamma,
                    const torch::Tensor& beta);
/// Single-map form on [C,H,W] with gamma/beta of length C.
FeatureMap adain(const FeatureMap& features, const torch::Tensor& gamma, const torch::Tensor& beta);

// ---------------------------------------------------------------------------
// Network families
// ---------------------------------------------------------------------------

struct ResBlockImpl : torch::nn::Module {
  explicit ResBlockImpl(int64_t channels);
  torch::Tensor forward(torch::Tensor x);

  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr};
  torch::nn::InstanceNorm2d norm1{nullptr}, norm2{nullptr};
};
TORCH_MODULE(ResBlock);

/// Strided convs, global average pooling, dense projection to the style vector.
struct StyleEncoderImpl : torch::nn::Module {
  StyleEncoderImpl(int64_t in_channels, const NetConfig& cfg);
  torch::Tensor forward(torch::Tensor x);

  torch::nn::Sequential body{nullptr};
  torch::nn::Linear head{nullptr};
};
TORCH_MODULE(StyleEncoder);

/// Two stride-2 convs (factor 4) followed by instance-normalized residual blocks.
struct ContentEncoderImpl : torch::nn::Module {
  ContentEncoderImpl(int64_t in_channels, const NetConfig& cfg);
  torch::Tensor forward(torch::Tensor x);

  torch::nn::Sequential body{nullptr};
};
TORCH_MODULE(ContentEncoder);

struct AdainResBlockImpl : torch::nn::Module {
  explicit AdainResBlockImpl(int64_t channels);
  /// `params` holds [gamma1, beta1, gamma2, beta2] slices, each [N,C].
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& params);

  int64_t channels;
  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr};
};
TORCH_MODULE(AdainResBlock);

/// AdaIN residual blocks fed by an MLP over the style code, two nearest
/// x2 upsampling stages, sigmoid output.
struct GeneratorImpl : torch::nn::Module {
  GeneratorImpl(int64_t out_channels, const NetConfig& cfg);
  torch::Tensor forward(const torch::Tensor& content, const torch::Tensor& style);

  int64_t content_channels;
  int64_t style_dim;
  torch::nn::Sequential mlp{nullptr};
  torch::nn::ModuleList blocks{nullptr};
  torch::nn::Conv2d up1{nullptr}, up2{nullptr}, out{nullptr};
};
TORCH_MODULE(Generator);

struct PatchNetImpl : torch::nn::Module {
  PatchNetImpl(int64_t in_channels, int64_t base);
  torch::Tensor forward(torch::Tensor x);
  torch::nn::Sequential body{nullptr};
};
TORCH_MODULE(PatchNet);

/// One patch network per octave; logits are unbounded.
struct DiscriminatorImpl : torch::nn::Module {
  DiscriminatorImpl(int64_t in_channels, const NetConfig& cfg);
  std::vector<torch::Tensor> forward(torch::Tensor x);
  torch::nn::ModuleList scales{nullptr};
};
TORCH_MODULE(Discriminator);

struct MappedStyles {
  StyleCode albedo;
  StyleCode shade;
  StyleCode cross;  // LiDAR style when mapping from I, image style when mapping from L
};

struct StyleMapperImpl : torch::nn::Module {
  explicit StyleMapperImpl(const NetConfig& cfg);
  torch::Tensor forward(torch::Tensor p);  // [N, 3*style_dim]
  int64_t style_dim;
  torch::nn::Sequential mlp{nullptr};
};
TORCH_MODULE(StyleMapper);

enum class PerceptualMode { FixedRandom, Pretrained };

/// Frozen conv pyramid. In FixedRandom mode the weights come from a seeded
/// generator, so the feature space is reproducible without any download.
struct PerceptualExtractorImpl : torch::nn::Module {
  explicit PerceptualExtractorImpl(uint64_t seed);
  std::vector<torch::Tensor> forward(torch::Tensor x);
  /// Replaces the random weights with tensors from a liet checkpoint file
  /// whose entries are named like this module's parameters.
  void load_pretrained(const std::string& path);

  PerceptualMode mode = PerceptualMode::FixedRandom;
  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr}, conv3{nullptr};
};
TORCH_MODULE(PerceptualExtractor);

// ---------------------------------------------------------------------------
// Full parameter set
// ---------------------------------------------------------------------------

enum class NetId : int {
  StyleEncI, StyleEncL, StyleEncR, StyleEncS,
  ContentEncI, ContentEncL, ContentEncR, ContentEncS,
  GenI, GenL, GenR, GenS,
  DiscI, DiscL, DiscR, DiscS,
  MapperI, MapperL,
  Perceptual,
};
inline constexpr int kNetCount = 19;

NetId style_encoder_id(DomainId d);
NetId content_encoder_id(DomainId d);
NetId generator_id(DomainId d);
NetId discriminator_id(DomainId d);
NetId mapper_id(DomainId source);
std::string net_name(NetId id);

/// Holds every network of the model. Forward methods are read-only on
/// parameters; each call bumps an atomic per-network invocation counter.
class LietModelImpl : public torch::nn::Module {
 public:
  explicit LietModelImpl(NetConfig cfg);

  const NetConfig& config() const { return cfg_; }

  /// x is [N,C,H,W] with C = domain_channels(domain). For domain L the
  /// validity mask (default all ones) is appended as an extra input channel.
  StyleCode encode_style(DomainId domain, const torch::Tensor& x,
                         const std::optional<torch::Tensor>& mask = std::nullopt);
  ContentCode encode_content(DomainId domain, const torch::Tensor& x,
                             const std::optional<torch::Tensor>& mask = std::nullopt);
  torch::Tensor generate(DomainId domain, const ContentCode& c, const StyleCode& p);
  std::vector<torch::Tensor> discriminate(DomainId domain, const torch::Tensor& x);
  MappedStyles map_style(DomainId source, const StyleCode& p);
  std::vector<torch::Tensor> perceptual_features(const torch::Tensor& x);

  StyleEncoder style_encoder(DomainId d) const { return style_enc_[static_cast<int>(d)]; }
  ContentEncoder content_encoder(DomainId d) const { return content_enc_[static_cast<int>(d)]; }
  Generator generator(DomainId d) const { return gen_[static_cast<int>(d)]; }
  Discriminator discriminator(DomainId d) const { return disc_[static_cast<int>(d)]; }
  StyleMapper mapper(DomainId source) const;
  PerceptualExtractor perceptual() const { return perceptual_; }

  std::vector<torch::Tensor> parameters_of(NetId id) const;
  /// Every trainable parameter of encoders, generators and mappers.
  std::vector<torch::Tensor> generator_side_parameters() const;
  std::vector<torch::Tensor> discriminator_parameters() const;

  uint64_t invocations(NetId id) const { return counters_[static_cast<int>(id)].load(); }
  void reset_invocations();

  void set_requires_grad(const std::vector<torch::Tensor>& params, bool on);

 private:
  torch::Tensor lidar_input(const torch::Tensor& x, const std::optional<torch::Tensor>& mask) const;
  void bump(NetId id) { counters_[static_cast<int>(id)].fetch_add(1, std::memory_order_relaxed); }
  torch::nn::Module& module_of(NetId id) const;

  NetConfig cfg_;
  std::array<StyleEncoder, 4> style_enc_{nullptr, nullptr, nullptr, nullptr};
  std::array<ContentEncoder, 4> content_enc_{nullptr, nullptr, nullptr, nullptr};
  std::array<Generator, 4> gen_{nullptr, nullptr, nullptr, nullptr};
  std::array<Discriminator, 4> disc_{nullptr, nullptr, nullptr, nullptr};
  StyleMapper mapper_i_{nullptr}, mapper_l_{nullptr};
  PerceptualExtractor perceptual_{nullptr};
  mutable std::array<std::atomic<uint64_t>, kNetCount> counters_{};
};
TORCH_MODULE(LietModel);

/// Centered Gaussian (std 0.02) on conv weights, zero conv biases.
void init_conv_weights(torch::nn::Module& module);

}  // namespace liet
