// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#include "liet/pipeline.hpp"

namespace liet {

torch::Tensor reconstruct_within(LietModel& model, DomainId domain, const torch::Tensor& x,
                                 const std::optional<torch::Tensor>& mask) {
  auto c = model->encode_content(domain, x, mask);
  auto p = model->encode_style(domain, x, mask);
  return model->generate(domain, c, p);
}

ImagePathOutputs forward_image_path(LietModel& model, const torch::Tensor& x_i,
                                    bool with_lidar_translation) {
  ImagePathOutputs out;
  out.p_i = model->encode_style(DomainId::I, x_i);
  out.c_i = model->encode_content(DomainId::I, x_i);
  out.styles = model->map_style(DomainId::I, out.p_i);
  out.x_ri = model->generate(DomainId::R, out.c_i, out.styles.albedo);
  out.x_si = model->generate(DomainId::S, out.c_i, out.styles.shade);
  if (with_lidar_translation) out.x_li = model->generate(DomainId::L, out.c_i, out.styles.cross);
  return out;
}

LidarPathOutputs forward_lidar_path(LietModel& model, const torch::Tensor& x_l,
                                    const torch::Tensor& m_l, bool with_image_translation) {
  LidarPathOutputs out;
  out.p_l = model->encode_style(DomainId::L, x_l, m_l);
  out.c_l = model->encode_content(DomainId::L, x_l, m_l);
  out.styles = model->map_style(DomainId::L, out.p_l);
  out.x_rl = model->generate(DomainId::R, out.c_l, out.styles.albedo);
  out.x_sl = model->generate(DomainId::S, out.c_l, out.styles.shade);
  if (with_image_translation) out.x_il = model->generate(DomainId::I, out.c_l, out.styles.cross);
  return out;
}

ForwardBundle training_forward(LietModel& model, const TrainingBatch& batch,
                               const PipelineSwitches& switches) {
  require(batch.x_i.defined() && batch.x_i.size(0) > 0, "training_forward: empty image batch");
  require(batch.x_r.defined() && batch.x_r.size(0) > 0, "training_forward: empty albedo batch");
  require(batch.x_s.defined() && batch.x_s.size(0) > 0, "training_forward: empty shade batch");
  require(batch.x_l.size(0) == batch.x_i.size(0) && batch.m_l.sizes() == batch.x_l.sizes(),
          "training_forward: LiDAR batch must pair with the image batch");

  ForwardBundle b;
  b.inputs = batch;
  const auto& m = batch.m_l;

  // Within-domain reconstruction. The albedo/shade style codes double as the
  // reference distributions of the KLD term.
  b.x_ii = reconstruct_within(model, DomainId::I, batch.x_i);
  b.x_ll = reconstruct_within(model, DomainId::L, batch.x_l, m);
  {
    auto c = model->encode_content(DomainId::R, batch.x_r);
    b.p_r = model->encode_style(DomainId::R, batch.x_r);
    b.x_rr = model->generate(DomainId::R, c, b.p_r);
  }
  {
    auto c = model->encode_content(DomainId::S, batch.x_s);
    b.p_s = model->encode_style(DomainId::S, batch.x_s);
    b.x_ss = model->generate(DomainId::S, c, b.p_s);
  }

  // Cross-domain paths.
  b.image = forward_image_path(model, batch.x_i, switches.ilc_paths);
  b.lidar = forward_lidar_path(model, batch.x_l, m, switches.ilc_paths);

  // Re-encodings for the style and content consistency terms.
  auto add_pairs = [&](const std::string& name, DomainId target_domain, const torch::Tensor& x,
                       const StyleCode& p_target, const ContentCode& c_target,
                       const std::optional<torch::Tensor>& mask) {
    b.style_pairs.push_back({name, {model->encode_style(target_domain, x, mask).vec, p_target.vec}});
    b.content_pairs.push_back({name, {model->encode_content(target_domain, x, mask).map, c_target.map}});
  };
  if (switches.ilc_paths) add_pairs("LI", DomainId::L, *b.image.x_li, b.image.styles.cross, b.image.c_i, m);
  add_pairs("RI", DomainId::R, b.image.x_ri, b.image.styles.albedo, b.image.c_i, std::nullopt);
  add_pairs("SI", DomainId::S, b.image.x_si, b.image.styles.shade, b.image.c_i, std::nullopt);
  if (switches.ilc_paths) add_pairs("IL", DomainId::I, *b.lidar.x_il, b.lidar.styles.cross, b.lidar.c_l, std::nullopt);
  add_pairs("RL", DomainId::R, b.lidar.x_rl, b.lidar.styles.albedo, b.lidar.c_l, std::nullopt);
  add_pairs("SL", DomainId::S, b.lidar.x_sl, b.lidar.styles.shade, b.lidar.c_l, std::nullopt);
  return b;
}

std::vector<std::string> ForwardBundle::populated_fields() const {
  std::vector<std::string> names;
  auto note = [&](const char* name, const torch::Tensor& t) {
    if (t.defined()) names.emplace_back(name);
  };
  note("x_II", x_ii);
  note("x_LL", x_ll);
  note("x_RR", x_rr);
  note("x_SS", x_ss);
  note("x_RI", image.x_ri);
  note("x_SI", image.x_si);
  if (image.x_li) note("x_LI", *image.x_li);
  note("x_RL", lidar.x_rl);
  note("x_SL", lidar.x_sl);
  if (lidar.x_il) note("x_IL", *lidar.x_il);
  note("p_I", image.p_i.vec);
  note("c_I", image.c_i.map);
  note("p_L", lidar.p_l.vec);
  note("c_L", lidar.c_l.map);
  note("p_RI", image.styles.albedo.vec);
  note("p_SI", image.styles.shade.vec);
  if (image.x_li) note("p_LI", image.styles.cross.vec);
  note("p_RL", lidar.styles.albedo.vec);
  note("p_SL", lidar.styles.shade.vec);
  if (lidar.x_il) note("p_IL", lidar.styles.cross.vec);
  note("p_R", p_r.vec);
  note("p_S", p_s.vec);
  for (const auto& p : style_pairs) names.push_back("sty_" + p.name);
  for (const auto& p : content_pairs) names.push_back("cnt_" + p.name);
  return names;
}

std::vector<AdversarialPairing> adversarial_pairings(const ForwardBundle& b,
                                                     const PipelineSwitches& switches) {
  std::vector<AdversarialPairing> out;
  out.push_back({DomainId::R, "RI", b.inputs.x_r, b.image.x_ri});
  out.push_back({DomainId::R, "RL", b.inputs.x_r, b.lidar.x_rl});
  out.push_back({DomainId::S, "SI", b.inputs.x_s, b.image.x_si});
  out.push_back({DomainId::S, "SL", b.inputs.x_s, b.lidar.x_sl});
  if (switches.ilc_paths) {
    out.push_back({DomainId::L, "LI", b.inputs.x_l, *b.image.x_li * b.inputs.m_l});
    out.push_back({DomainId::I, "IL", b.inputs.x_i, *b.lidar.x_il});
  }
  return out;
}

BatchDecomposition infer_batch(LietModel& model, const torch::Tensor& x_i) {
  require(x_i.dim() == 4 && x_i.size(1) == 3, "infer: expected an [N,3,H,W] image batch");
  if (x_i.size(2) % 4 != 0 || x_i.size(3) % 4 != 0) {
    throw ContractViolation("infer: image height and width must be divisible by 4 (got " +
                            std::to_string(x_i.size(2)) + "x" + std::to_string(x_i.size(3)) +
                            "); crop or resize before inference");
  }
  torch::NoGradGuard no_grad;
  auto out = forward_image_path(model, x_i, /*with_lidar_translation=*/false);
  return {out.x_ri, out.x_si};
}

DecompositionResult infer(LietModel& model, const FeatureMap& x_i) {
  require(x_i.channels() == 3, "infer: image must have 3 channels");
  auto out = infer_batch(model, x_i.tensor().unsqueeze(0).to(torch::kFloat32));
  return {FeatureMap(out.albedo.squeeze(0), ValueRange::Unit),
          FeatureMap(out.shade.squeeze(0), ValueRange::Unit)};
}

}  // namespace liet
