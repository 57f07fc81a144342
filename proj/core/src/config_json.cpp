// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#include "config_json.hpp"

namespace liet::detail {

const json ObjectReader::kEmpty = json::object();

ObjectReader::ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
  if (!j_.is_object()) fail(where_.empty() ? "<root>" : where_, "expected object");
}

const json& ObjectReader::object(const char* key) {
  seen_.insert(key);
  if (!j_.contains(key)) return kEmpty;
  const auto& v = j_.at(key);
  if (!v.is_object()) fail(join(key), "expected object");
  return v;
}

void ObjectReader::finish() const {
  for (const auto& item : j_.items()) {
    if (!seen_.count(item.key())) fail(join(item.key().c_str()), "unknown key");
  }
}

void ObjectReader::fail(const std::string& path, const std::string& why) {
  throw ConfigError(path + ": " + why);
}

namespace {

const auto positive_d = [](const double& v) { return v > 0.0; };
const auto nonneg_d = [](const double& v) { return v >= 0.0; };
const auto positive_i = [](const int64_t& v) { return v > 0; };
const auto nonneg_i = [](const int64_t& v) { return v >= 0; };
const auto unit_open = [](const double& v) { return v >= 0.0 && v < 1.0; };

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }
json range_json(const IntRange& r) { return json::array({r.lo, r.hi}); }

template <typename R>
void read_range(const json& j, const char* key, const std::string& where, R& out) {
  const auto path = where + "." + key;
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    ObjectReader::fail(path, "expected [lo, hi]");
  }
  if constexpr (std::is_same_v<R, IntRange>) {
    if (!v[0].is_number_integer() || !v[1].is_number_integer()) ObjectReader::fail(path, "expected integer [lo, hi]");
    out = {v[0].get<int64_t>(), v[1].get<int64_t>()};
  } else {
    out = {v[0].get<double>(), v[1].get<double>()};
  }
  if (out.lo > out.hi) ObjectReader::fail(path, "lo must not exceed hi");
}

}  // namespace

json to_json(const NetConfig& c) {
  return {{"style_dim", c.style_dim},       {"content_channels", c.content_channels},
          {"downsample_factor", c.downsample_factor}, {"n_res_blocks", c.n_res_blocks},
          {"disc_scales", c.disc_scales},   {"mlp_hidden", c.mlp_hidden},
          {"base_channels", c.base_channels}, {"perceptual_seed", c.perceptual_seed}};
}

void read_into(const json& j, const std::string& where, NetConfig& c) {
  ObjectReader r(j, where);
  r.field<int64_t>("style_dim", c.style_dim, positive_i, "must be > 0");
  r.field<int64_t>("content_channels", c.content_channels,
                   [](const int64_t& v) { return v >= 4 && v % 4 == 0; }, "must be a positive multiple of 4");
  r.field<int64_t>("downsample_factor", c.downsample_factor, [](const int64_t& v) { return v == 4; },
                   "is fixed to 4");
  r.field<int64_t>("n_res_blocks", c.n_res_blocks, positive_i, "must be > 0");
  r.field<int64_t>("disc_scales", c.disc_scales, positive_i, "must be > 0");
  r.field<int64_t>("mlp_hidden", c.mlp_hidden, positive_i, "must be > 0");
  r.field<int64_t>("base_channels", c.base_channels, positive_i, "must be > 0");
  r.field<uint64_t>("perceptual_seed", c.perceptual_seed);
  r.finish();
}

json to_json(const LossWeights& w) {
  return {{"img", w.img}, {"sty", w.sty}, {"cnt", w.cnt}, {"kld", w.kld},
          {"vgg", w.vgg}, {"phy", w.phy}, {"aa", w.aa},   {"smooth", w.smooth}};
}

void read_into(const json& j, const std::string& where, LossWeights& w) {
  ObjectReader r(j, where);
  for (auto [key, ptr] : {std::pair{"img", &w.img}, {"sty", &w.sty}, {"cnt", &w.cnt}, {"kld", &w.kld},
                          {"vgg", &w.vgg}, {"phy", &w.phy}, {"aa", &w.aa}, {"smooth", &w.smooth}}) {
    r.field<double>(key, *ptr, nonneg_d, "must be >= 0");
  }
  r.finish();
}

json to_json(const AblationFlags& a) {
  return {{"no_aa", a.no_aa}, {"no_instance_norm", a.no_instance_norm}, {"no_gray", a.no_gray},
          {"no_ilc", a.no_ilc}, {"with_smooth", a.with_smooth}};
}

void read_into(const json& j, const std::string& where, AblationFlags& a) {
  ObjectReader r(j, where);
  r.field<bool>("no_aa", a.no_aa);
  r.field<bool>("no_instance_norm", a.no_instance_norm);
  r.field<bool>("no_gray", a.no_gray);
  r.field<bool>("no_ilc", a.no_ilc);
  r.field<bool>("with_smooth", a.with_smooth);
  r.finish();
}

json to_json(const TrainConfig& c) {
  return {{"weights", to_json(c.weights)},
          {"lr_gen", c.lr_gen},
          {"lr_disc", c.lr_disc},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"batch_size", c.batch_size},
          {"max_iters", c.max_iters},
          {"seed", c.seed},
          {"ablation", to_json(c.ablation)},
          {"checkpoint_every", c.checkpoint_every},
          {"adversarial", c.adversarial},
          {"deterministic", c.deterministic}};
}

void read_into(const json& j, const std::string& where, TrainConfig& c) {
  ObjectReader r(j, where);
  read_into(r.object("weights"), r.join("weights"), c.weights);
  r.field<double>("lr_gen", c.lr_gen, positive_d, "must be > 0");
  r.field<double>("lr_disc", c.lr_disc, positive_d, "must be > 0");
  r.field<double>("adam_beta1", c.adam_beta1, unit_open, "must lie in [0,1)");
  r.field<double>("adam_beta2", c.adam_beta2, unit_open, "must lie in [0,1)");
  r.field<int64_t>("batch_size", c.batch_size, positive_i, "must be > 0");
  r.field<int64_t>("max_iters", c.max_iters, positive_i, "must be > 0");
  r.field<uint64_t>("seed", c.seed);
  read_into(r.object("ablation"), r.join("ablation"), c.ablation);
  r.field<int64_t>("checkpoint_every", c.checkpoint_every, nonneg_i, "must be >= 0");
  r.field<bool>("adversarial", c.adversarial);
  r.field<bool>("deterministic", c.deterministic);
  r.finish();
  if (c.weights.kld > 0.0 && c.batch_size < 2) {
    ObjectReader::fail(r.join("batch_size"), "must be >= 2 while weights.kld > 0");
  }
}

json to_json(const SceneSpec& s) {
  return {{"size", s.size},
          {"n_shapes", range_json(s.n_shapes)},
          {"shadow_count", range_json(s.shadow_count)},
          {"shadow_attenuation", range_json(s.shadow_attenuation)},
          {"shade_smoothness", s.shade_smoothness},
          {"lidar_coverage", range_json(s.lidar_coverage)},
          {"lidar_noise_sigma", s.lidar_noise_sigma},
          {"lidar_gamma", range_json(s.lidar_gamma)},
          {"seed", s.seed}};
}

void read_into(const json& j, const std::string& where, SceneSpec& s) {
  ObjectReader r(j, where);
  r.field<int64_t>("size", s.size, [](const int64_t& v) { return v >= 4 && v % 4 == 0; },
                   "must be a positive multiple of 4");
  for (const char* key : {"n_shapes", "shadow_count", "shadow_attenuation", "lidar_coverage", "lidar_gamma"}) {
    r.mark(key);
  }
  read_range(j, "n_shapes", where, s.n_shapes);
  read_range(j, "shadow_count", where, s.shadow_count);
  read_range(j, "shadow_attenuation", where, s.shadow_attenuation);
  read_range(j, "lidar_coverage", where, s.lidar_coverage);
  read_range(j, "lidar_gamma", where, s.lidar_gamma);
  r.field<double>("shade_smoothness", s.shade_smoothness, positive_d, "must be > 0");
  r.field<double>("lidar_noise_sigma", s.lidar_noise_sigma, nonneg_d, "must be >= 0");
  r.field<uint64_t>("seed", s.seed);
  r.finish();
  try {
    s.validate();
  } catch (const ContractViolation& e) {
    ObjectReader::fail(where, e.what());
  }
}

json to_json(const EvalSettings& e) {
  return {{"mode", eval_mode_name(e.mode)}, {"seed", e.sample_seed}, {"k_per_image", e.k_per_image},
          {"delta", e.delta}};
}

void read_into(const json& j, const std::string& where, EvalSettings& e) {
  ObjectReader r(j, where);
  std::string mode = eval_mode_name(e.mode);
  r.field<std::string>("mode", mode, [](const std::string& m) { return m == "all" || m == "random"; },
                       "must be \"random\" or \"all\"");
  e.mode = eval_mode_from_name(mode);
  r.field<uint64_t>("seed", e.sample_seed);
  r.field<int64_t>("k_per_image", e.k_per_image, positive_i, "must be > 0");
  r.field<double>("delta", e.delta, [](const double& v) { return v >= 1.0; }, "must be >= 1");
  r.finish();
}

}  // namespace liet::detail
