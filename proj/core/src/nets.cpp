// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#include "liet/nets.hpp"

#include "liet/checkpoint.hpp"
#include "liet/pixel_ops.hpp"

namespace liet {
namespace nn = torch::nn;

namespace {

nn::Conv2dOptions conv_opts(int64_t in, int64_t out, int64_t k, int64_t stride, int64_t pad) {
  return nn::Conv2dOptions(in, out, k).stride(stride).padding(pad);
}

nn::InstanceNorm2d plain_instance_norm(int64_t c) {
  return nn::InstanceNorm2d(
      nn::InstanceNorm2dOptions(c).eps(kInstanceNormEps).affine(false).track_running_stats(false));
}

void require_batch(const torch::Tensor& x, int64_t channels, const char* who) {
  if (x.dim() != 4) throw ContractViolation(std::string(who) + ": expected [N,C,H,W] input");
  if (x.size(1) != channels) {
    throw ContractViolation(std::string(who) + ": expected " + std::to_string(channels) +
                            " channels, got " + std::to_string(x.size(1)));
  }
}

}  // namespace

void NetConfig::validate() const {
  require(style_dim > 0 && content_channels > 0 && n_res_blocks > 0 && disc_scales > 0 &&
              mlp_hidden > 0 && base_channels > 0,
          "NetConfig: all sizes must be positive");
  require(downsample_factor == 4, "NetConfig: downsample_factor is fixed to 4");
}

torch::Tensor adain(const torch::Tensor& features, const torch::Tensor& gamma,
                    const torch::Tensor& beta) {
  require(features.dim() == 4, "adain: features must be [N,C,H,W]");
  const auto n = features.size(0);
  const auto c = features.size(1);
  require(gamma.dim() == 2 && beta.dim() == 2, "adain: gamma/beta must be [N,C]");
  require(gamma.size(0) == n && beta.size(0) == n, "adain: batch size mismatch");
  require(gamma.size(1) == c && beta.size(1) == c, "adain: gamma/beta length must equal channels");
  return gamma.view({n, c, 1, 1}) * instance_normalize(features) + beta.view({n, c, 1, 1});
}

FeatureMap adain(const FeatureMap& features, const torch::Tensor& gamma, const torch::Tensor& beta) {
  const auto c = features.channels();
  require(gamma.dim() == 1 && beta.dim() == 1, "adain: gamma/beta must be vectors");
  require(gamma.size(0) == c && beta.size(0) == c, "adain: gamma/beta length must equal channels");
  auto out = adain(features.tensor().unsqueeze(0), gamma.unsqueeze(0), beta.unsqueeze(0));
  return FeatureMap(out.squeeze(0), ValueRange::Free);
}

// ---------------------------------------------------------------------------

ResBlockImpl::ResBlockImpl(int64_t channels) {
  conv1 = register_module("conv1", nn::Conv2d(conv_opts(channels, channels, 3, 1, 1)));
  conv2 = register_module("conv2", nn::Conv2d(conv_opts(channels, channels, 3, 1, 1)));
  norm1 = register_module("norm1", plain_instance_norm(channels));
  norm2 = register_module("norm2", plain_instance_norm(channels));
}

torch::Tensor ResBlockImpl::forward(torch::Tensor x) {
  auto h = torch::relu(norm1(conv1(x)));
  return x + norm2(conv2(h));
}

StyleEncoderImpl::StyleEncoderImpl(int64_t in_channels, const NetConfig& cfg) {
  const auto b = cfg.base_channels;
  body = register_module("body", nn::Sequential(
      nn::Conv2d(conv_opts(in_channels, b, 7, 1, 3)), nn::ReLU(),
      nn::Conv2d(conv_opts(b, 2 * b, 4, 2, 1)), nn::ReLU(),
      nn::Conv2d(conv_opts(2 * b, 4 * b, 4, 2, 1)), nn::ReLU(),
      nn::Conv2d(conv_opts(4 * b, 4 * b, 4, 2, 1)), nn::ReLU(),
      nn::AdaptiveAvgPool2d(nn::AdaptiveAvgPool2dOptions({1, 1}))));
  head = register_module("head", nn::Linear(4 * b, cfg.style_dim));
}

torch::Tensor StyleEncoderImpl::forward(torch::Tensor x) { return head(body->forward(x).flatten(1)); }

ContentEncoderImpl::ContentEncoderImpl(int64_t in_channels, const NetConfig& cfg) {
  const auto b = cfg.base_channels;
  auto seq = nn::Sequential(
      nn::Conv2d(conv_opts(in_channels, b, 7, 1, 3)), plain_instance_norm(b), nn::ReLU(),
      nn::Conv2d(conv_opts(b, 2 * b, 4, 2, 1)), plain_instance_norm(2 * b), nn::ReLU(),
      nn::Conv2d(conv_opts(2 * b, cfg.content_channels, 4, 2, 1)),
      plain_instance_norm(cfg.content_channels), nn::ReLU());
  for (int64_t i = 0; i < cfg.n_res_blocks; ++i) seq->push_back(ResBlock(cfg.content_channels));
  body = register_module("body", seq);
}

torch::Tensor ContentEncoderImpl::forward(torch::Tensor x) { return body->forward(x); }

AdainResBlockImpl::AdainResBlockImpl(int64_t c) : channels(c) {
  conv1 = register_module("conv1", nn::Conv2d(conv_opts(c, c, 3, 1, 1)));
  conv2 = register_module("conv2", nn::Conv2d(conv_opts(c, c, 3, 1, 1)));
}

torch::Tensor AdainResBlockImpl::forward(const torch::Tensor& x, const torch::Tensor& params) {
  auto chunks = params.split(channels, 1);
  // gamma is parameterized around 1 so a fresh MLP starts close to plain IN.
  auto h = torch::relu(adain(conv1(x), 1.0 + chunks[0], chunks[1]));
  h = adain(conv2(h), 1.0 + chunks[2], chunks[3]);
  return x + h;
}

GeneratorImpl::GeneratorImpl(int64_t out_channels, const NetConfig& cfg)
    : content_channels(cfg.content_channels), style_dim(cfg.style_dim) {
  const auto c = cfg.content_channels;
  const auto n_adain = cfg.n_res_blocks * 4 * c;
  mlp = register_module("mlp", nn::Sequential(
      nn::Linear(cfg.style_dim, cfg.mlp_hidden), nn::ReLU(),
      nn::Linear(cfg.mlp_hidden, cfg.mlp_hidden), nn::ReLU(),
      nn::Linear(cfg.mlp_hidden, n_adain)));
  blocks = register_module("blocks", nn::ModuleList());
  for (int64_t i = 0; i < cfg.n_res_blocks; ++i) blocks->push_back(AdainResBlock(c));
  up1 = register_module("up1", nn::Conv2d(conv_opts(c, c / 2, 3, 1, 1)));
  up2 = register_module("up2", nn::Conv2d(conv_opts(c / 2, c / 4, 3, 1, 1)));
  out = register_module("out", nn::Conv2d(conv_opts(c / 4, out_channels, 7, 1, 3)));
}

torch::Tensor GeneratorImpl::forward(const torch::Tensor& content, const torch::Tensor& style) {
  const auto params = mlp->forward(style);
  const auto per_block = 4 * content_channels;
  auto h = content;
  for (size_t i = 0; i < blocks->size(); ++i) {
    auto slice = params.narrow(1, static_cast<int64_t>(i) * per_block, per_block);
    h = blocks[i]->as<AdainResBlock>()->forward(h, slice);
  }
  const auto up = nn::functional::InterpolateFuncOptions()
                      .scale_factor(std::vector<double>{2.0, 2.0})
                      .mode(torch::kNearest);
  h = torch::relu(up1(nn::functional::interpolate(h, up)));
  h = torch::relu(up2(nn::functional::interpolate(h, up)));
  return torch::sigmoid(out(h));
}

PatchNetImpl::PatchNetImpl(int64_t in_channels, int64_t b) {
  const auto lrelu = nn::LeakyReLUOptions().negative_slope(0.2);
  body = register_module("body", nn::Sequential(
      nn::Conv2d(conv_opts(in_channels, b, 4, 2, 1)), nn::LeakyReLU(lrelu),
      nn::Conv2d(conv_opts(b, 2 * b, 4, 2, 1)), nn::LeakyReLU(lrelu),
      nn::Conv2d(conv_opts(2 * b, 1, 1, 1, 0))));
}

torch::Tensor PatchNetImpl::forward(torch::Tensor x) { return body->forward(x); }

DiscriminatorImpl::DiscriminatorImpl(int64_t in_channels, const NetConfig& cfg) {
  scales = register_module("scales", nn::ModuleList());
  for (int64_t s = 0; s < cfg.disc_scales; ++s) scales->push_back(PatchNet(in_channels, cfg.base_channels));
}

std::vector<torch::Tensor> DiscriminatorImpl::forward(torch::Tensor x) {
  std::vector<torch::Tensor> out;
  out.reserve(scales->size());
  const auto pool = nn::functional::AvgPool2dFuncOptions(3).stride(2).padding(1).count_include_pad(false);
  for (size_t s = 0; s < scales->size(); ++s) {
    out.push_back(scales[s]->as<PatchNet>()->forward(x));
    if (s + 1 < scales->size()) x = nn::functional::avg_pool2d(x, pool);
  }
  return out;
}

StyleMapperImpl::StyleMapperImpl(const NetConfig& cfg) : style_dim(cfg.style_dim) {
  mlp = register_module("mlp", nn::Sequential(
      nn::Linear(cfg.style_dim, cfg.mlp_hidden), nn::ReLU(),
      nn::Linear(cfg.mlp_hidden, cfg.mlp_hidden), nn::ReLU(),
      nn::Linear(cfg.mlp_hidden, 3 * cfg.style_dim)));
}

torch::Tensor StyleMapperImpl::forward(torch::Tensor p) { return mlp->forward(p); }

PerceptualExtractorImpl::PerceptualExtractorImpl(uint64_t seed) {
  conv1 = register_module("conv1", nn::Conv2d(conv_opts(3, 16, 3, 1, 1)));
  conv2 = register_module("conv2", nn::Conv2d(conv_opts(16, 32, 3, 1, 1)));
  conv3 = register_module("conv3", nn::Conv2d(conv_opts(32, 64, 3, 1, 1)));
  auto gen = at::detail::createCPUGenerator(seed);
  torch::NoGradGuard no_grad;
  for (auto& conv : {conv1, conv2, conv3}) {
    const auto fan_in = conv->weight.size(1) * conv->weight.size(2) * conv->weight.size(3);
    conv->weight.normal_(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)), gen);
    conv->bias.zero_();
  }
  for (auto& p : parameters()) p.set_requires_grad(false);
}

std::vector<torch::Tensor> PerceptualExtractorImpl::forward(torch::Tensor x) {
  std::vector<torch::Tensor> feats;
  auto h = torch::relu(conv1(x));
  feats.push_back(h);
  h = torch::relu(conv2(torch::avg_pool2d(h, 2)));
  feats.push_back(h);
  h = torch::relu(conv3(torch::avg_pool2d(h, 2)));
  feats.push_back(h);
  return feats;
}

void PerceptualExtractorImpl::load_pretrained(const std::string& path) {
  const auto archive = read_tensor_archive(path);
  auto params = named_parameters();
  // Validate every entry before touching any weight.
  for (const auto& item : params) {
    auto it = archive.tensors.find(item.key());
    if (it == archive.tensors.end()) throw LoadError(path + ": missing tensor " + item.key());
    if (it->second.sizes() != item.value().sizes()) {
      throw LoadError(path + ": shape mismatch for " + item.key());
    }
  }
  torch::NoGradGuard no_grad;
  for (auto& item : params) item.value().copy_(archive.tensors.at(item.key()));
  mode = PerceptualMode::Pretrained;
}

// ---------------------------------------------------------------------------

NetId style_encoder_id(DomainId d) { return static_cast<NetId>(static_cast<int>(d)); }
NetId content_encoder_id(DomainId d) { return static_cast<NetId>(4 + static_cast<int>(d)); }
NetId generator_id(DomainId d) { return static_cast<NetId>(8 + static_cast<int>(d)); }
NetId discriminator_id(DomainId d) { return static_cast<NetId>(12 + static_cast<int>(d)); }

NetId mapper_id(DomainId source) {
  require(source == DomainId::I || source == DomainId::L, "style mapper source must be I or L");
  return source == DomainId::I ? NetId::MapperI : NetId::MapperL;
}

std::string net_name(NetId id) {
  const int v = static_cast<int>(id);
  if (v < 16) {
    static constexpr const char* kinds[] = {"style_enc_", "content_enc_", "gen_", "disc_"};
    return std::string(kinds[v / 4]) + std::string(domain_name(static_cast<DomainId>(v % 4)));
  }
  switch (id) {
    case NetId::MapperI: return "mapper_I";
    case NetId::MapperL: return "mapper_L";
    default: return "perceptual";
  }
}

void init_conv_weights(torch::nn::Module& module) {
  torch::NoGradGuard no_grad;
  for (auto& m : module.modules(/*include_self=*/true)) {
    if (auto* conv = m->as<nn::Conv2d>()) {
      conv->weight.normal_(0.0, 0.02);
      if (conv->bias.defined()) conv->bias.zero_();
    }
  }
}

LietModelImpl::LietModelImpl(NetConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  for (auto d : kAllDomains) {
    const int i = static_cast<int>(d);
    // The LiDAR encoders also see the validity mask as a second channel.
    const int64_t enc_in = d == DomainId::L ? 2 : domain_channels(d);
    style_enc_[i] = register_module(net_name(style_encoder_id(d)), StyleEncoder(enc_in, cfg_));
    content_enc_[i] = register_module(net_name(content_encoder_id(d)), ContentEncoder(enc_in, cfg_));
    gen_[i] = register_module(net_name(generator_id(d)), Generator(domain_channels(d), cfg_));
    disc_[i] = register_module(net_name(discriminator_id(d)), Discriminator(domain_channels(d), cfg_));
  }
  mapper_i_ = register_module("mapper_I", StyleMapper(cfg_));
  mapper_l_ = register_module("mapper_L", StyleMapper(cfg_));
  for (int i = 0; i < 16; ++i) init_conv_weights(module_of(static_cast<NetId>(i)));
  perceptual_ = register_module("perceptual", PerceptualExtractor(cfg_.perceptual_seed));
}

StyleMapper LietModelImpl::mapper(DomainId source) const {
  return mapper_id(source) == NetId::MapperI ? mapper_i_ : mapper_l_;
}

torch::nn::Module& LietModelImpl::module_of(NetId id) const {
  const int v = static_cast<int>(id);
  if (v < 4) return *style_enc_[v].ptr();
  if (v < 8) return *content_enc_[v - 4].ptr();
  if (v < 12) return *gen_[v - 8].ptr();
  if (v < 16) return *disc_[v - 12].ptr();
  if (id == NetId::MapperI) return *mapper_i_.ptr();
  if (id == NetId::MapperL) return *mapper_l_.ptr();
  return *perceptual_.ptr();
}

torch::Tensor LietModelImpl::lidar_input(const torch::Tensor& x,
                                         const std::optional<torch::Tensor>& mask) const {
  auto m = mask ? mask->to(x.scalar_type()) : torch::ones_like(x);
  require(m.sizes() == x.sizes(), "LiDAR mask must match intensity shape");
  return torch::cat({x * m, m}, 1);
}

StyleCode LietModelImpl::encode_style(DomainId domain, const torch::Tensor& x,
                                      const std::optional<torch::Tensor>& mask) {
  require_batch(x, domain_channels(domain), "encode_style");
  bump(style_encoder_id(domain));
  auto net = style_enc_[static_cast<int>(domain)];
  return StyleCode{net->forward(domain == DomainId::L ? lidar_input(x, mask) : x)};
}

ContentCode LietModelImpl::encode_content(DomainId domain, const torch::Tensor& x,
                                          const std::optional<torch::Tensor>& mask) {
  require_batch(x, domain_channels(domain), "encode_content");
  if (x.size(2) % cfg_.downsample_factor != 0 || x.size(3) % cfg_.downsample_factor != 0) {
    throw ContractViolation("encode_content: H and W must be divisible by 4, got " +
                            std::to_string(x.size(2)) + "x" + std::to_string(x.size(3)));
  }
  bump(content_encoder_id(domain));
  auto net = content_enc_[static_cast<int>(domain)];
  return ContentCode{net->forward(domain == DomainId::L ? lidar_input(x, mask) : x)};
}

torch::Tensor LietModelImpl::generate(DomainId domain, const ContentCode& c, const StyleCode& p) {
  require(c.map.dim() == 4 && c.map.size(1) == cfg_.content_channels,
          "generate: content code must be [N, content_channels, h, w]");
  require(p.vec.dim() == 2 && p.vec.size(1) == cfg_.style_dim,
          "generate: style code must be [N, style_dim]");
  require(p.vec.size(0) == c.map.size(0), "generate: batch size mismatch between codes");
  bump(generator_id(domain));
  return gen_[static_cast<int>(domain)]->forward(c.map, p.vec);
}

std::vector<torch::Tensor> LietModelImpl::discriminate(DomainId domain, const torch::Tensor& x) {
  require_batch(x, domain_channels(domain), "discriminate");
  bump(discriminator_id(domain));
  return disc_[static_cast<int>(domain)]->forward(x);
}

MappedStyles LietModelImpl::map_style(DomainId source, const StyleCode& p) {
  const auto id = mapper_id(source);
  require(p.vec.dim() == 2 && p.vec.size(1) == cfg_.style_dim, "map_style: style code length mismatch");
  bump(id);
  auto out = mapper(source)->forward(p.vec).split(cfg_.style_dim, 1);
  return MappedStyles{StyleCode{out[0]}, StyleCode{out[1]}, StyleCode{out[2]}};
}

std::vector<torch::Tensor> LietModelImpl::perceptual_features(const torch::Tensor& x) {
  require_batch(x, 3, "perceptual_features");
  bump(NetId::Perceptual);
  return perceptual_->forward(x);
}

std::vector<torch::Tensor> LietModelImpl::parameters_of(NetId id) const {
  return module_of(id).parameters();
}

std::vector<torch::Tensor> LietModelImpl::generator_side_parameters() const {
  std::vector<torch::Tensor> out;
  for (int i = 0; i < kNetCount; ++i) {
    const auto id = static_cast<NetId>(i);
    if ((i >= 12 && i < 16) || id == NetId::Perceptual) continue;
    auto p = parameters_of(id);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

std::vector<torch::Tensor> LietModelImpl::discriminator_parameters() const {
  std::vector<torch::Tensor> out;
  for (auto d : kAllDomains) {
    auto p = parameters_of(discriminator_id(d));
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

void LietModelImpl::reset_invocations() {
  for (auto& c : counters_) c.store(0);
}

void LietModelImpl::set_requires_grad(const std::vector<torch::Tensor>& params, bool on) {
  for (auto p : params) p.set_requires_grad(on);
}

}  // namespace liet
