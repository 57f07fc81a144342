// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#include "liet/evalkit.hpp"

#include <algorithm>
#include <json.hpp>
#include <map>
#include <numeric>

#include "liet/pipeline.hpp"
#include "liet/pixel_ops.hpp"
#include "liet/seeding.hpp"

namespace liet {
namespace {

torch::Tensor gray_of(const torch::Tensor& albedo) {
  require(albedo.dim() == 3 && albedo.size(0) == 3, "albedo must be [3,H,W]");
  return to_grayscale(albedo).to(torch::kFloat64).contiguous();
}

void check_judgments(const torch::Tensor& gray, const JudgmentSet& js) {
  require(!js.empty(), "judgment set is empty");
  const auto h = gray.size(1), w = gray.size(2);
  for (const auto& j : js) {
    require(j.ya >= 0 && j.ya < h && j.yb >= 0 && j.yb < h && j.xa >= 0 && j.xa < w && j.xb >= 0 && j.xb < w,
            "judgment point outside the image");
  }
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

JudgmentLabel predict_relation(const torch::Tensor& gray, const Judgment& j, double delta) {
  const auto acc = gray.accessor<double, 3>();
  return relation_from_gray(acc[0][j.ya][j.xa], acc[0][j.yb][j.xb], delta);
}

double whdr(const torch::Tensor& albedo, const JudgmentSet& judgments, double delta) {
  const auto gray = gray_of(albedo);
  check_judgments(gray, judgments);
  double wrong = 0.0, total = 0.0;
  for (const auto& j : judgments) {
    total += j.weight;
    if (predict_relation(gray, j, delta) != j.label) wrong += j.weight;
  }
  return wrong / total;
}

PrecisionRecall prf(const torch::Tensor& albedo, const JudgmentSet& judgments, double delta) {
  const auto gray = gray_of(albedo);
  check_judgments(gray, judgments);
  double tp = 0.0, predicted_pos = 0.0, actual_pos = 0.0;
  for (const auto& j : judgments) {
    const auto pred = predict_relation(gray, j, delta);
    const bool pred_pos = pred != JudgmentLabel::Equal;
    const bool actual = j.label != JudgmentLabel::Equal;
    if (pred_pos) predicted_pos += j.weight;
    if (actual) actual_pos += j.weight;
    if (pred_pos && actual && pred == j.label) tp += j.weight;
  }
  PrecisionRecall r;
  // With nothing to find and nothing claimed the predictor is perfect.
  r.precision = predicted_pos > 0.0 ? tp / predicted_pos : (actual_pos > 0.0 ? 0.0 : 1.0);
  r.recall = actual_pos > 0.0 ? tp / actual_pos : (predicted_pos > 0.0 ? 0.0 : 1.0);
  r.f_score = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

std::string eval_mode_name(EvalMode m) { return m == EvalMode::All ? "all" : "random"; }

EvalMode eval_mode_from_name(const std::string& s) {
  if (s == "all") return EvalMode::All;
  if (s == "random" || s == "random_sampled") return EvalMode::RandomSampled;
  throw std::invalid_argument("unknown eval mode '" + s + "' (expected random|all)");
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["mode"] = mode == EvalMode::All ? "all" : "random_sampled";
  j["whdr"] = whdr;
  j["precision"] = precision;
  j["recall"] = recall;
  j["f_score"] = f_score;
  j["n_judgments"] = n_judgments;
  j["phy_residual"] = phy_residual;
  j["shadow_contrast"] = shadow_contrast ? nlohmann::ordered_json(*shadow_contrast) : nlohmann::ordered_json();
  return j.dump(2);
}

double physical_consistency(const FeatureMap& x_i, const DecompositionResult& result) {
  const auto& x = x_i.tensor();
  require(result.albedo.tensor().sizes() == x.sizes() && result.shade.tensor().sizes() == x.sizes(),
          "physical_consistency: dims differ");
  return (x.to(torch::kFloat64) - result.albedo.tensor().to(torch::kFloat64) * result.shade.tensor().to(torch::kFloat64))
      .abs()
      .mean()
      .item<double>();
}

double shadow_contrast(const torch::Tensor& albedo, const torch::Tensor& gt_shadow_mask,
                       const torch::Tensor& gt_albedo) {
  require(albedo.dim() == 3 && albedo.size(0) == 3 && gt_albedo.sizes() == albedo.sizes(),
          "shadow_contrast: albedo and gt_albedo must be [3,H,W] of equal size");
  require(gt_shadow_mask.dim() == 3 && gt_shadow_mask.size(0) == 1 && gt_shadow_mask.size(1) == albedo.size(1) &&
              gt_shadow_mask.size(2) == albedo.size(2),
          "shadow_contrast: mask must be [1,H,W] matching the albedo");
  const auto h = albedo.size(1), w = albedo.size(2);
  const auto gray = to_grayscale(albedo).to(torch::kFloat64).contiguous();
  const auto mask = gt_shadow_mask.to(torch::kFloat64).contiguous();
  const auto gt = gt_albedo.to(torch::kFloat32).contiguous();
  const double shadow_frac = (mask > 0.5).to(torch::kFloat64).mean().item<double>();
  require(shadow_frac >= 0.01 && shadow_frac <= 0.99, "shadow_contrast: degenerate shadow mask");

  const auto ga = gray.accessor<double, 3>();
  const auto ma = mask.accessor<double, 3>();
  const auto gta = gt.accessor<float, 3>();
  struct Acc {
    double shadow_sum = 0, lit_sum = 0;
    int64_t shadow_n = 0, lit_n = 0;
  };
  std::map<std::array<float, 3>, Acc> regions;
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      auto& r = regions[{gta[0][y][x], gta[1][y][x], gta[2][y][x]}];
      if (ma[0][y][x] > 0.5) {
        r.shadow_sum += ga[0][y][x];
        ++r.shadow_n;
      } else {
        r.lit_sum += ga[0][y][x];
        ++r.lit_n;
      }
    }
  }
  double weighted = 0.0, weights = 0.0;
  for (const auto& [color, r] : regions) {
    if (r.shadow_n == 0 || r.lit_n == 0) continue;
    const double lit_mean = r.lit_sum / r.lit_n;
    if (lit_mean <= 0.0) continue;
    weighted += r.shadow_n * ((r.shadow_sum / r.shadow_n) / lit_mean);
    weights += r.shadow_n;
  }
  require(weights > 0.0, "shadow_contrast: no albedo region has both shadowed and lit pixels");
  return weighted / weights;
}

JudgmentSet select_judgments(const JudgmentSet& all, const EvalSettings& settings, size_t index) {
  if (settings.mode == EvalMode::All || static_cast<int64_t>(all.size()) <= settings.k_per_image) return all;
  require(settings.k_per_image > 0, "k_per_image must be > 0");
  std::vector<size_t> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(settings.sample_seed, index));
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(static_cast<size_t>(settings.k_per_image));
  std::sort(order.begin(), order.end());
  JudgmentSet out;
  for (auto i : order) out.push_back(all[i]);
  return out;
}

EvalReport evaluate_predictions(const Dataset& data, const Decomposer& decompose, const EvalSettings& settings) {
  require(!data.judgments.empty() && data.judgments.size() == data.samples.size(),
          "evaluate: dataset carries no judgments");
  EvalReport rep;
  rep.mode = settings.mode;
  double p_sum = 0, r_sum = 0, whdr_sum = 0, phy_sum = 0;
  int64_t scored = 0;
  std::vector<double> contrasts;
  for (size_t i = 0; i < data.samples.size(); ++i) {
    const auto& s = data.samples[i];
    const auto result = decompose(s);
    phy_sum += physical_consistency(s.image, result);
    if (s.gt_shadow_mask && s.gt_albedo) {
      const double frac = s.gt_shadow_mask->mean().item<double>();
      if (frac >= 0.01 && frac <= 0.99) {
        try {
          contrasts.push_back(shadow_contrast(result.albedo.tensor(), *s.gt_shadow_mask, s.gt_albedo->tensor()));
        } catch (const ContractViolation&) {
          // no region straddles the shadow boundary
        }
      }
    }
    const auto js = select_judgments(data.judgments[i], settings, i);
    if (js.empty()) continue;
    whdr_sum += whdr(result.albedo.tensor(), js, settings.delta);
    const auto pr = prf(result.albedo.tensor(), js, settings.delta);
    p_sum += pr.precision;
    r_sum += pr.recall;
    rep.n_judgments += static_cast<int64_t>(js.size());
    ++scored;
  }
  require(scored > 0, "evaluate: no image has judgments");
  rep.whdr = whdr_sum / scored;
  rep.precision = p_sum / scored;
  rep.recall = r_sum / scored;
  rep.f_score = rep.precision + rep.recall > 0 ? 2 * rep.precision * rep.recall / (rep.precision + rep.recall) : 0.0;
  rep.phy_residual = phy_sum / static_cast<double>(data.samples.size());
  if (!contrasts.empty()) rep.shadow_contrast = median(contrasts);
  return rep;
}

EvalReport evaluate_model(LietModel& model, const Dataset& data, const EvalSettings& settings) {
  return evaluate_predictions(
      data, [&](const PairedSample& s) { return infer(model, s.image); }, settings);
}

}  // namespace liet
