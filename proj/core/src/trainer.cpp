// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#include "liet/trainer.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "config_json.hpp"
#include "liet/checkpoint.hpp"

namespace liet {

using detail::json;

PipelineSwitches AblationFlags::switches() const {
  PipelineSwitches s;
  s.albedo_alignment = !no_aa;
  s.aa_instance_norm = !no_instance_norm;
  s.aa_grayscale = !no_gray;
  s.ilc_paths = !no_ilc;
  return s;
}

void TrainConfig::validate() const {
  weights.validate();
  require(lr_gen > 0 && lr_disc > 0, "TrainConfig: learning rates must be positive");
  require(adam_beta1 >= 0 && adam_beta1 < 1 && adam_beta2 >= 0 && adam_beta2 < 1,
          "TrainConfig: Adam betas must lie in [0,1)");
  require(batch_size > 0, "TrainConfig: batch_size must be positive");
  require(max_iters > 0, "TrainConfig: max_iters must be positive");
  require(checkpoint_every >= 0, "TrainConfig: checkpoint_every must be >= 0");
  require(weights.kld == 0.0 || batch_size >= 2, "TrainConfig: the KLD term needs batch_size >= 2");
}

LossWeights TrainConfig::effective_weights() const {
  LossWeights w = weights;
  if (ablation.no_aa) w.aa = 0.0;
  if (ablation.with_smooth && w.smooth == 0.0) w.smooth = 1.0;
  return w;
}

NonFiniteLoss::NonFiniteLoss(const std::string& term, double value)
    : std::runtime_error("non-finite loss term '" + term + "': " + std::to_string(value)), term_(term) {}

TrainingData TrainingData::from_samples(const std::vector<PairedSample>& samples,
                                        const std::vector<FeatureMap>& albedo_pool,
                                        const std::vector<FeatureMap>& shade_pool) {
  if (samples.empty()) throw ConfigError("training data: no paired samples");
  if (albedo_pool.empty() || shade_pool.empty()) throw ConfigError("training data: albedo and shade pools must be non-empty");
  const auto h = samples.front().height(), w = samples.front().width();
  std::vector<torch::Tensor> images, lidar, masks, albedo, shade;
  for (const auto& s : samples) {
    require(s.height() == h && s.width() == w, "TrainingData: samples differ in size (" + s.sample_id + ")");
    images.push_back(s.image.tensor());
    lidar.push_back(s.lidar.intensity.tensor());
    masks.push_back(s.lidar.mask);
  }
  for (const auto& m : albedo_pool) {
    require(m.channels() == 3 && m.height() == h && m.width() == w, "TrainingData: albedo pool map has wrong shape");
    albedo.push_back(m.tensor());
  }
  for (const auto& m : shade_pool) {
    require(m.channels() == 3 && m.height() == h && m.width() == w, "TrainingData: shade pool map has wrong shape");
    shade.push_back(m.tensor());
  }
  auto stack = [](std::vector<torch::Tensor>& v) { return torch::stack(v).to(torch::kFloat32).contiguous(); };
  return {stack(images), stack(lidar), stack(masks), stack(albedo), stack(shade)};
}

namespace {

bool is_disc_name(const std::string& n) { return n.rfind("disc_", 0) == 0; }
bool is_perceptual_name(const std::string& n) { return n.rfind("perceptual", 0) == 0; }

torch::optim::AdamOptions adam_options(double lr, const TrainConfig& c) {
  return torch::optim::AdamOptions(lr).betas({c.adam_beta1, c.adam_beta2});
}

double checked(const std::string& term, const torch::Tensor& t) {
  if (!t.defined()) return 0.0;
  const double v = t.item<double>();
  if (!std::isfinite(v)) throw NonFiniteLoss(term, v);
  return v;
}

}  // namespace

Trainer::Trainer(NetConfig net, TrainConfig train) : net_(std::move(net)), train_(std::move(train)) {
  net_.validate();
  train_.validate();
  seed_everything(train_.seed, train_.deterministic);
  model_ = LietModel(net_);
  rng_.seed(derive_seed(train_.seed, 1));

  std::vector<torch::Tensor> gen_params, disc_params;
  for (const auto& item : model_->named_parameters()) {
    if (is_perceptual_name(item.key())) continue;
    if (is_disc_name(item.key())) {
      disc_param_names_.push_back(item.key());
      disc_params.push_back(item.value());
    } else {
      gen_param_names_.push_back(item.key());
      gen_params.push_back(item.value());
    }
  }
  gen_opt_ = std::make_unique<torch::optim::Adam>(gen_params, adam_options(train_.lr_gen, train_));
  disc_opt_ = std::make_unique<torch::optim::Adam>(disc_params, adam_options(train_.lr_disc, train_));
  check_optimizer_disjointness();
}

void Trainer::check_optimizer_disjointness() const {
  std::set<const void*> gen, disc;
  for (const auto& p : gen_opt_->param_groups().at(0).params()) gen.insert(p.unsafeGetTensorImpl());
  for (const auto& p : disc_opt_->param_groups().at(0).params()) {
    if (gen.count(p.unsafeGetTensorImpl())) throw std::logic_error("optimizer parameter sets overlap");
    disc.insert(p.unsafeGetTensorImpl());
  }
  std::set<const void*> expect_gen, expect_disc;
  for (const auto& p : model_->generator_side_parameters()) expect_gen.insert(p.unsafeGetTensorImpl());
  for (const auto& p : model_->discriminator_parameters()) expect_disc.insert(p.unsafeGetTensorImpl());
  if (gen != expect_gen || disc != expect_disc) {
    throw std::logic_error("optimizer parameter sets do not match the model partition");
  }
}

TrainingBatch Trainer::sample_batch(const TrainingData& data) {
  require(data.size() > 0, "sample_batch: empty training data");
  const auto n = train_.batch_size;
  auto draw = [&](int64_t pool_size) {
    std::uniform_int_distribution<int64_t> pick(0, pool_size - 1);
    std::vector<int64_t> idx(static_cast<size_t>(n));
    for (auto& i : idx) i = pick(rng_);
    return torch::tensor(idx, torch::kLong);
  };
  const auto img_idx = draw(data.size());
  const auto alb_idx = draw(data.albedo_pool.size(0));
  const auto shd_idx = draw(data.shade_pool.size(0));
  TrainingBatch b;
  b.x_i = data.images.index_select(0, img_idx);
  b.x_l = data.lidar.index_select(0, img_idx);
  b.m_l = data.masks.index_select(0, img_idx);
  b.x_r = data.albedo_pool.index_select(0, alb_idx);
  b.x_s = data.shade_pool.index_select(0, shd_idx);
  return b;
}

LossReport Trainer::train_step(const TrainingBatch& batch, const StepOptions& opts) {
  check_optimizer_disjointness();
  const auto switches = train_.ablation.switches();
  const auto weights = train_.effective_weights();
  const auto disc_params = model_->discriminator_parameters();

  auto bundle = training_forward(model_, batch, switches);
  const auto pairings = train_.adversarial ? adversarial_pairings(bundle, switches)
                                           : std::vector<AdversarialPairing>{};
  LossReport report;
  report.iter = iteration_ + 1;

  if (train_.adversarial) {
    model_->set_requires_grad(disc_params, true);
    disc_opt_->zero_grad();
    torch::Tensor d_loss = torch::zeros({});
    for (const auto& p : pairings) {
      d_loss = d_loss + loss_adv_d(model_->discriminate(p.domain, p.real),
                                   model_->discriminate(p.domain, p.fake.detach()));
    }
    report.adv_d = checked("adv_d", d_loss);
    d_loss.backward();
    disc_opt_->step();
    disc_opt_->zero_grad(/*set_to_none=*/true);
    model_->set_requires_grad(disc_params, false);
  }

  LossTerms terms;
  if (train_.adversarial) {
    terms.adv = torch::zeros({});
    for (const auto& p : pairings) terms.adv = terms.adv + loss_adv_g(model_->discriminate(p.domain, p.fake));
  }
  const auto& in = bundle.inputs;
  terms.img = loss_img(bundle.x_ii, in.x_i, bundle.x_ll, in.x_l, bundle.x_rr, in.x_r, bundle.x_ss, in.x_s);
  std::vector<CodePair> sty, cnt;
  for (const auto& p : bundle.style_pairs) sty.push_back(p.pair);
  for (const auto& p : bundle.content_pairs) cnt.push_back(p.pair);
  terms.sty = loss_style(sty);
  terms.cnt = loss_content(cnt);
  if (weights.kld > 0.0) {
    terms.kld = loss_kld(fit_style_distribution(bundle.image.styles.albedo.vec), fit_style_distribution(bundle.p_r.vec),
                         fit_style_distribution(bundle.image.styles.shade.vec), fit_style_distribution(bundle.p_s.vec));
  }
  if (weights.vgg > 0.0) {
    auto extractor = model_->perceptual();
    terms.vgg = loss_vgg(extractor, in.x_i, bundle.image.x_ri);
  }
  terms.phy = loss_phy(in.x_i, bundle.image.x_ri, bundle.image.x_si);
  if (switches.albedo_alignment && weights.aa > 0.0) {
    terms.aa = loss_aa(bundle.image.x_ri, bundle.lidar.x_rl, in.m_l,
                       {switches.aa_grayscale, switches.aa_instance_norm});
  }
  if (weights.smooth > 0.0) terms.smooth = loss_smooth(bundle.image.x_ri, in.x_i);
  auto total = loss_total(terms, weights);

  report.adv_g = checked("adv_g", terms.adv);
  report.img = checked("img", terms.img);
  report.sty = checked("sty", terms.sty);
  report.cnt = checked("cnt", terms.cnt);
  report.kld = checked("kld", terms.kld);
  report.vgg = checked("vgg", terms.vgg);
  report.phy = checked("phy", terms.phy);
  report.aa = checked("aa", terms.aa);
  report.smooth = checked("smooth", terms.smooth);
  report.total = checked("total", total);

  gen_opt_->zero_grad();
  total.backward();
  if (opts.after_backward) opts.after_backward(model_);
  gen_opt_->step();
  model_->set_requires_grad(disc_params, true);
  ++iteration_;
  return report;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kCheckpointFormat = "liet-checkpoint";

void append_adam(const torch::optim::Adam& opt, const std::vector<std::string>& names, const std::string& prefix,
                 std::vector<std::pair<std::string, torch::Tensor>>& entries, json& steps) {
  const auto& params = opt.param_groups().at(0).params();
  const auto& state = opt.state();
  steps = json::object();
  for (size_t i = 0; i < params.size(); ++i) {
    auto it = state.find(params[i].unsafeGetTensorImpl());
    if (it == state.end()) continue;
    const auto& s = static_cast<const torch::optim::AdamParamState&>(*it->second);
    entries.emplace_back(prefix + "/" + names[i] + "/m", s.exp_avg());
    entries.emplace_back(prefix + "/" + names[i] + "/v", s.exp_avg_sq());
    steps[names[i]] = s.step();
  }
}

}  // namespace

std::string Trainer::encode_checkpoint(bool include_optimizer) const {
  std::vector<std::pair<std::string, torch::Tensor>> entries;
  for (const auto& item : model_->named_parameters()) entries.emplace_back("param/" + item.key(), item.value());
  json meta;
  meta["format"] = kCheckpointFormat;
  meta["net"] = detail::to_json(net_);
  meta["train"] = detail::to_json(train_);
  meta["iteration"] = iteration_;
  meta["rng"] = serialize_rng(rng_);
  meta["optimizer"] = include_optimizer;
  if (include_optimizer) {
    append_adam(*gen_opt_, gen_param_names_, "adam_gen", entries, meta["adam_steps"]["gen"]);
    append_adam(*disc_opt_, disc_param_names_, "adam_disc", entries, meta["adam_steps"]["disc"]);
  }
  torch::NoGradGuard no_grad;
  return encode_tensor_archive(entries, meta.dump());
}

void Trainer::save_checkpoint(const std::filesystem::path& path, bool include_optimizer) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto bytes = encode_checkpoint(include_optimizer);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write checkpoint " + path.string());
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("cannot write checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

std::unique_ptr<Trainer> Trainer::load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LoadError(path.string() + ": cannot open checkpoint");
  std::stringstream ss;
  ss << f.rdbuf();
  return decode_checkpoint(ss.str(), path.string());
}

std::unique_ptr<Trainer> Trainer::decode_checkpoint(const std::string& bytes, const std::string& origin) {
  auto fail = [&](const std::string& why) -> void { throw LoadError(origin + ": " + why); };
  const auto archive = decode_tensor_archive(bytes, origin);

  json meta;
  try {
    meta = json::parse(archive.json);
  } catch (const json::exception&) {
    fail("metadata is not valid JSON");
  }
  if (!meta.is_object() || meta.value("format", "") != kCheckpointFormat) fail("not a liet checkpoint");
  for (const char* key : {"net", "train", "iteration", "rng", "optimizer"}) {
    if (!meta.contains(key)) fail(std::string("metadata lacks '") + key + "'");
  }
  NetConfig net;
  TrainConfig train;
  try {
    detail::read_into(meta.at("net"), "net", net);
    detail::read_into(meta.at("train"), "train", train);
  } catch (const ConfigError& e) {
    fail(std::string("bad embedded config: ") + e.what());
  }
  if (!meta.at("iteration").is_number_integer() || meta.at("iteration").get<int64_t>() < 0) fail("bad iteration");
  if (!meta.at("rng").is_string() || !meta.at("optimizer").is_boolean()) fail("bad metadata types");
  Rng rng;
  try {
    rng = deserialize_rng(meta.at("rng").get<std::string>());
  } catch (const std::exception&) {
    fail("bad RNG state");
  }
  const bool with_opt = meta.at("optimizer").get<bool>();

  auto trainer = std::make_unique<Trainer>(net, train);
  std::set<std::string> expected;
  std::vector<std::pair<torch::Tensor, torch::Tensor>> copies;
  for (const auto& item : trainer->model_->named_parameters()) {
    const auto key = "param/" + item.key();
    expected.insert(key);
    auto it = archive.tensors.find(key);
    if (it == archive.tensors.end()) fail("missing tensor " + key);
    if (it->second.sizes() != item.value().sizes()) fail("shape mismatch for " + key);
    copies.emplace_back(item.value(), it->second);
  }

  struct AdamRestore {
    torch::optim::Adam* opt;
    torch::Tensor param;
    int64_t step;
    torch::Tensor m, v;
  };
  std::vector<AdamRestore> restores;
  if (with_opt) {
    if (!meta.contains("adam_steps") || !meta.at("adam_steps").is_object()) fail("metadata lacks 'adam_steps'");
    auto collect = [&](torch::optim::Adam& opt, const std::vector<std::string>& names, const char* prefix,
                       const char* group) {
      const auto& steps = meta.at("adam_steps").value(group, json::object());
      if (!steps.is_object()) fail(std::string("bad adam_steps.") + group);
      const auto& params = opt.param_groups().at(0).params();
      std::set<std::string> known(names.begin(), names.end());
      for (const auto& s : steps.items()) {
        if (!known.count(s.key())) fail(std::string("optimizer state for unknown parameter ") + s.key());
      }
      for (size_t i = 0; i < names.size(); ++i) {
        if (!steps.contains(names[i])) continue;
        const auto& st = steps.at(names[i]);
        if (!st.is_number_integer() || st.get<int64_t>() < 0) fail("bad Adam step for " + names[i]);
        const auto base = std::string(prefix) + "/" + names[i];
        auto m = archive.tensors.find(base + "/m");
        auto v = archive.tensors.find(base + "/v");
        if (m == archive.tensors.end() || v == archive.tensors.end()) fail("missing Adam moments for " + names[i]);
        if (m->second.sizes() != params[i].sizes() || v->second.sizes() != params[i].sizes()) {
          fail("Adam moment shape mismatch for " + names[i]);
        }
        expected.insert(base + "/m");
        expected.insert(base + "/v");
        restores.push_back({&opt, params[i], st.get<int64_t>(), m->second, v->second});
      }
    };
    collect(*trainer->gen_opt_, trainer->gen_param_names_, "adam_gen", "gen");
    collect(*trainer->disc_opt_, trainer->disc_param_names_, "adam_disc", "disc");
  }
  for (const auto& [name, t] : archive.entries) {
    if (!expected.count(name)) fail("unexpected tensor " + name);
  }

  {
    torch::NoGradGuard no_grad;
    for (auto& [dst, src] : copies) dst.copy_(src);
  }
  for (auto& r : restores) {
    auto state = std::make_unique<torch::optim::AdamParamState>();
    state->step(r.step);
    state->exp_avg(r.m.clone());
    state->exp_avg_sq(r.v.clone());
    r.opt->state()[r.param.unsafeGetTensorImpl()] = std::move(state);
  }
  trainer->iteration_ = meta.at("iteration").get<int64_t>();
  trainer->rng_ = rng;
  return trainer;
}

// ---------------------------------------------------------------------------
// Loop
// ---------------------------------------------------------------------------

std::vector<LossReport> fit(Trainer& trainer, const TrainingData& data, const FitOptions& opts) {
  const auto& cfg = trainer.train_config();
  std::vector<LossReport> reports;
  while (trainer.iteration() < cfg.max_iters) {
    auto batch = trainer.sample_batch(data);
    auto report = trainer.train_step(batch);
    if (opts.log) *opts.log << report.to_json_line() << "\n" << std::flush;
    if (opts.on_step) opts.on_step(report);
    reports.push_back(report);
    const auto it = trainer.iteration();
    const bool periodic = cfg.checkpoint_every > 0 && it % cfg.checkpoint_every == 0;
    if (!opts.checkpoint_dir.empty() && (periodic || it == cfg.max_iters)) {
      trainer.save_checkpoint(opts.checkpoint_dir / ("ckpt_" + std::to_string(it) + ".liet"));
    }
  }
  return reports;
}

std::unique_ptr<Trainer> fit(const NetConfig& net, const TrainConfig& config, const TrainingData& data,
                             const FitOptions& opts) {
  auto trainer = std::make_unique<Trainer>(net, config);
  fit(*trainer, data, opts);
  return trainer;
}

}  // namespace liet
