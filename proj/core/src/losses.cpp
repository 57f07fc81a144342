// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#include "liet/losses.hpp"

#include <json.hpp>

#include "liet/pixel_ops.hpp"

namespace liet {
namespace F = torch::nn::functional;

namespace {

void require_same(const torch::Tensor& a, const torch::Tensor& b, const char* who) {
  if (a.sizes() != b.sizes()) {
    throw ContractViolation(std::string(who) + ": shape mismatch");
  }
}

torch::Tensor sum_pairs(std::span<const CodePair> pairs, const char* who) {
  require(!pairs.empty(), std::string(who) + ": no code pairs");
  torch::Tensor total;
  for (const auto& p : pairs) {
    require_same(p.reencoded, p.target, who);
    auto d = (p.reencoded - p.target).abs().mean();
    total = total.defined() ? total + d : d;
  }
  return total;
}

}  // namespace

void LossWeights::validate() const {
  for (double v : {img, sty, cnt, kld, vgg, phy, aa, smooth}) {
    require(v >= 0.0 && std::isfinite(v), "LossWeights: weights must be finite and non-negative");
  }
}

torch::Tensor mean_l1(const torch::Tensor& a, const torch::Tensor& b) {
  require_same(a, b, "mean_l1");
  return (a - b).abs().mean();
}

torch::Tensor loss_img(const torch::Tensor& x_ii, const torch::Tensor& x_i,
                       const torch::Tensor& x_ll, const torch::Tensor& x_l,
                       const torch::Tensor& x_rr, const torch::Tensor& x_r,
                       const torch::Tensor& x_ss, const torch::Tensor& x_s) {
  return mean_l1(x_ii, x_i) + mean_l1(x_ll, x_l) + mean_l1(x_rr, x_r) + mean_l1(x_ss, x_s);
}

torch::Tensor loss_style(std::span<const CodePair> pairs) { return sum_pairs(pairs, "loss_style"); }

torch::Tensor loss_content(std::span<const CodePair> pairs) { return sum_pairs(pairs, "loss_content"); }

torch::Tensor loss_adv_d(const std::vector<torch::Tensor>& real_scores,
                         const std::vector<torch::Tensor>& fake_scores) {
  require(!real_scores.empty() && real_scores.size() == fake_scores.size(),
          "loss_adv_d: real and fake score lists must be non-empty and equally long");
  torch::Tensor total;
  for (size_t s = 0; s < real_scores.size(); ++s) {
    auto term = F::softplus(-real_scores[s]).mean() + F::softplus(fake_scores[s]).mean();
    total = total.defined() ? total + term : term;
  }
  return total / static_cast<double>(real_scores.size());
}

torch::Tensor loss_adv_g(const std::vector<torch::Tensor>& fake_scores) {
  require(!fake_scores.empty(), "loss_adv_g: empty score list");
  torch::Tensor total;
  for (const auto& s : fake_scores) {
    auto term = F::softplus(-s).mean();
    total = total.defined() ? total + term : term;
  }
  return total / static_cast<double>(fake_scores.size());
}

torch::Tensor loss_vgg(PerceptualExtractor& extractor, const torch::Tensor& x_i,
                       const torch::Tensor& x_ri) {
  require_same(x_i, x_ri, "loss_vgg");
  const auto batched = [](const torch::Tensor& t) { return t.dim() == 3 ? t.unsqueeze(0) : t; };
  const auto fa = extractor->forward(batched(x_i));
  const auto fb = extractor->forward(batched(x_ri));
  torch::Tensor total;
  for (size_t k = 0; k < fa.size(); ++k) {
    auto d = (fa[k] - fb[k]).abs().mean();
    total = total.defined() ? total + d : d;
  }
  return total / static_cast<double>(fa.size());
}

StyleDistribution fit_style_distribution(const torch::Tensor& codes) {
  require(codes.dim() == 2, "fit_style_distribution: codes must be [N, D]");
  require(codes.size(0) >= 2, "fit_style_distribution: batch size must be >= 2");
  auto mean = codes.mean(0);
  auto var = (codes - mean).pow(2).mean(0).clamp_min(kStyleVarFloor);
  return StyleDistribution{mean, var};
}

torch::Tensor gaussian_kl(const StyleDistribution& p, const StyleDistribution& q) {
  require_same(p.mean, q.mean, "gaussian_kl");
  require_same(p.var, q.var, "gaussian_kl");
  require(p.var.min().item<double>() > 0.0 && q.var.min().item<double>() > 0.0,
          "gaussian_kl: variances must be positive");
  auto per_dim = 0.5 * (torch::log(q.var / p.var) + (p.var + (p.mean - q.mean).pow(2)) / q.var - 1.0);
  return per_dim.sum();
}

torch::Tensor loss_kld(const StyleDistribution& q_ri, const StyleDistribution& q_r,
                       const StyleDistribution& q_si, const StyleDistribution& q_s) {
  return gaussian_kl(q_ri, q_r) + gaussian_kl(q_si, q_s);
}

torch::Tensor loss_phy(const torch::Tensor& x_i, const torch::Tensor& x_ri, const torch::Tensor& x_si) {
  require_same(x_ri, x_si, "loss_phy");
  return mean_l1(x_i, x_ri * x_si);
}

torch::Tensor loss_aa(const torch::Tensor& x_ri, const torch::Tensor& x_rl, const torch::Tensor& mask,
                      AlbedoAlignmentOptions opts) {
  require_same(x_ri, x_rl, "loss_aa");
  require(mask.dim() == x_ri.dim() && mask.size(-1) == x_ri.size(-1) && mask.size(-2) == x_ri.size(-2),
          "loss_aa: mask dims do not match albedo");
  const auto m = mask.to(x_ri.scalar_type());
  const auto valid = m.sum();
  if (valid.item<double>() <= 0.0) return (x_ri * 0.0).sum();

  auto prepare = [&](const torch::Tensor& albedo) {
    auto a = apply_mask(albedo, m);
    if (opts.grayscale) a = to_grayscale(a);
    if (opts.instance_norm) a = masked_instance_normalize(a, m);
    return a;
  };
  const auto lhs = prepare(x_ri);
  const auto rhs = prepare(x_rl.detach());
  const auto channels = static_cast<double>(lhs.size(-3));
  return ((lhs - rhs).abs() * m).sum() / (valid * channels);
}

torch::Tensor loss_smooth(const torch::Tensor& x_ri, const torch::Tensor& x_i) {
  require_same(x_ri, x_i, "loss_smooth");
  const auto w = x_ri.size(-1);
  const auto h = x_ri.size(-2);
  require(w >= 2 && h >= 2, "loss_smooth: need at least 2x2 pixels");
  auto dx_r = (x_ri.narrow(-1, 1, w - 1) - x_ri.narrow(-1, 0, w - 1)).abs();
  auto dx_i = (x_i.narrow(-1, 1, w - 1) - x_i.narrow(-1, 0, w - 1)).abs();
  auto dy_r = (x_ri.narrow(-2, 1, h - 1) - x_ri.narrow(-2, 0, h - 1)).abs();
  auto dy_i = (x_i.narrow(-2, 1, h - 1) - x_i.narrow(-2, 0, h - 1)).abs();
  return (dx_r * torch::exp(-dx_i)).mean() + (dy_r * torch::exp(-dy_i)).mean();
}

torch::Tensor loss_total(const LossTerms& terms, const LossWeights& w) {
  w.validate();
  torch::Tensor total;
  auto add = [&](const torch::Tensor& term, double weight) {
    if (!term.defined() || weight == 0.0) return;
    auto v = weight == 1.0 ? term : weight * term;
    total = total.defined() ? total + v : v;
  };
  add(terms.adv, 1.0);
  add(terms.img, w.img);
  add(terms.sty, w.sty);
  add(terms.cnt, w.cnt);
  add(terms.kld, w.kld);
  add(terms.vgg, w.vgg);
  add(terms.phy, w.phy);
  add(terms.aa, w.aa);
  add(terms.smooth, w.smooth);
  if (!total.defined()) total = torch::zeros({}, torch::kFloat64);
  return total;
}

std::string LossReport::to_json_line() const {
  nlohmann::ordered_json j;
  j["iter"] = iter;
  j["adv_d"] = adv_d;
  j["adv_g"] = adv_g;
  j["img"] = img;
  j["sty"] = sty;
  j["cnt"] = cnt;
  j["kld"] = kld;
  j["vgg"] = vgg;
  j["phy"] = phy;
  j["aa"] = aa;
  j["smooth"] = smooth;
  j["total"] = total;
  return j.dump();
}

LossReport LossReport::from_json_line(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  LossReport r;
  r.iter = j.at("iter").get<int64_t>();
  r.adv_d = j.at("adv_d").get<double>();
  r.adv_g = j.at("adv_g").get<double>();
  r.img = j.at("img").get<double>();
  r.sty = j.at("sty").get<double>();
  r.cnt = j.at("cnt").get<double>();
  r.kld = j.at("kld").get<double>();
  r.vgg = j.at("vgg").get<double>();
  r.phy = j.at("phy").get<double>();
  r.aa = j.at("aa").get<double>();
  r.smooth = j.at("smooth").get<double>();
  r.total = j.at("total").get<double>();
  return r;
}

}  // namespace liet
