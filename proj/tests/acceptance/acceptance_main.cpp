// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance runner. Each criterion prints exactly one line:
//   criterion N: PASS|FAIL <measurements> (<seconds>s)
// and the process exits non-zero when any selected criterion fails.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "gradcheck.hpp"
#include "liet/checkpoint.hpp"
#include "liet/dataset_io.hpp"
#include "liet/evalkit.hpp"
#include "liet/losses.hpp"
#include "liet/pipeline.hpp"
#include "liet/pixel_ops.hpp"
#include "liet/seeding.hpp"
#include "liet/trainer.hpp"
#include "oracles.hpp"

namespace liet {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

fs::path work_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("liet_acceptance_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

TrainingData training_data(const Dataset& ds) {
  return TrainingData::from_samples(ds.samples, ds.albedo_pool.maps, ds.shade_pool.maps);
}

oracle::Gaussian to_oracle(const StyleDistribution& d) {
  oracle::Gaussian g;
  for (int64_t k = 0; k < d.mean.size(0); ++k) {
    g.mean.push_back(d.mean[k].item<double>());
    g.var.push_back(d.var[k].item<double>());
  }
  return g;
}

// ---------------------------------------------------------------------------

Outcome loss_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  auto gen = at::detail::createCPUGenerator(101);
  auto r = [&](std::vector<int64_t> s) { return torch::rand(s, gen, torch::kFloat64); };
  auto ext = gradcheck::double_extractor();
  const std::vector<std::pair<torch::Tensor, torch::Tensor>> layers{
      {ext->conv1->weight, ext->conv1->bias}, {ext->conv2->weight, ext->conv2->bias},
      {ext->conv3->weight, ext->conv3->bias}};
  std::map<std::string, double> worst;
  auto track = [&](const std::string& k, double a, double b) { worst[k] = std::max(worst[k], std::abs(a - b)); };
  double worst_total = 0.0;
  const LossWeights w;

  for (int trial = 0; trial < 50; ++trial) {
    auto x = r({3, 8, 8}), x2 = r({3, 8, 8}), l = r({1, 8, 8}), l2 = r({1, 8, 8});
    auto ra = r({3, 8, 8}), rb = r({3, 8, 8}), sa = r({3, 8, 8}), sb = r({3, 8, 8});
    LossTerms t;
    t.img = loss_img(x, x2, l, l2, ra, rb, sa, sb);
    track("img", t.img.item<double>(), oracle::img({{x, x2}, {l, l2}, {ra, rb}, {sa, sb}}));

    std::vector<CodePair> styles, contents;
    double sty_o = 0.0, cnt_o = 0.0;
    for (int k = 0; k < 6; ++k) {
      styles.push_back({r({3, 8}), r({3, 8})});
      contents.push_back({r({3, 8, 2, 2}), r({3, 8, 2, 2})});
      sty_o += oracle::mean_l1(styles.back().reencoded, styles.back().target);
      cnt_o += oracle::mean_l1(contents.back().reencoded, contents.back().target);
    }
    t.sty = loss_style(styles);
    t.cnt = loss_content(contents);
    track("sty", t.sty.item<double>(), sty_o);
    track("cnt", t.cnt.item<double>(), cnt_o);

    std::vector<torch::Tensor> real{6 * r({3, 1, 8, 8}) - 3, 6 * r({3, 1, 4, 4}) - 3};
    std::vector<torch::Tensor> fake{6 * r({3, 1, 8, 8}) - 3, 6 * r({3, 1, 4, 4}) - 3};
    track("adv_d", loss_adv_d(real, fake).item<double>(), oracle::adv_d(real, fake));
    t.adv = loss_adv_g(fake);
    track("adv_g", t.adv.item<double>(), oracle::adv_g(fake));

    auto q_ri = fit_style_distribution(r({3, 8})), q_r = fit_style_distribution(r({3, 8}));
    auto q_si = fit_style_distribution(r({3, 8})), q_s = fit_style_distribution(r({3, 8}));
    t.kld = loss_kld(q_ri, q_r, q_si, q_s);
    track("kld", t.kld.item<double>(),
          oracle::kl(to_oracle(q_ri), to_oracle(q_r)) + oracle::kl(to_oracle(q_si), to_oracle(q_s)));

    t.vgg = loss_vgg(ext, x, ra);
    track("vgg", t.vgg.item<double>(), oracle::vgg(layers, x, ra));
    t.phy = loss_phy(x, ra, sa);
    track("phy", t.phy.item<double>(), oracle::phy(x, ra, sa));
    auto mask = (r({1, 8, 8}) > 0.4).to(torch::kFloat64);
    t.aa = loss_aa(ra, rb, mask);
    track("aa", t.aa.item<double>(), oracle::aa(ra, rb, mask, true, true));
    t.smooth = loss_smooth(ra, x);
    track("smooth", t.smooth.item<double>(), oracle::smooth(ra, x));

    double expected = t.adv.item<double>();
    for (auto [term, weight] : {std::pair{&t.img, w.img}, {&t.sty, w.sty}, {&t.cnt, w.cnt}, {&t.kld, w.kld},
                                {&t.vgg, w.vgg}, {&t.phy, w.phy}, {&t.aa, w.aa}, {&t.smooth, w.smooth}}) {
      expected += weight * term->item<double>();
    }
    const double total = loss_total(t, w).item<double>();
    worst_total = std::max(worst_total, std::abs(total - expected) / std::max(1.0, std::abs(expected)));
  }
  bool pass = worst_total <= 1e-12;
  std::string detail;
  for (const auto& [k, v] : worst) {
    pass &= v <= 1e-9;
    detail += k + "=" + fmt("%.1e", v) + " ";
  }
  detail += "total(rel)=" + fmt("%.1e", worst_total);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {pass && secs < 30.0, "50 trials, max|d| " + detail};
}

Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  auto gen = at::detail::createCPUGenerator(77);
  bool pass = true;
  double worst = 0.0;
  std::string worst_name;
  int cases = 0;
  for (auto& c : gradcheck::loss_cases(gen, gradcheck::double_extractor())) {
    const auto res = gradcheck::check(c.fn, c.inputs);
    pass &= res.checked > 0 && res.max_rel_error <= 1e-4;
    if (res.max_rel_error >= worst) {
      worst = res.max_rel_error;
      worst_name = c.name;
    }
    ++cases;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {pass && secs < 120.0, std::to_string(cases) + " losses, worst rel err " + fmt("%.2e", worst) + " (" + worst_name + ")"};
}

Outcome stop_gradient() {
  NetConfig net;
  TrainConfig cfg;
  cfg.weights = LossWeights{0, 0, 0, 0, 0, 0, 100, 0};
  cfg.adversarial = false;
  cfg.seed = 3;
  Trainer trainer(net, cfg);
  SceneSpec spec;
  spec.size = 32;
  auto data = training_data(make_synthetic_dataset(spec, 8, 5, 10));
  double max_grad = 0.0;
  bool image_side_reached = true;
  for (int step = 0; step < 20; ++step) {
    StepOptions opts;
    opts.after_backward = [&](LietModel& m) {
      for (auto id : {NetId::StyleEncL, NetId::ContentEncL, NetId::MapperL})
        for (const auto& p : m->parameters_of(id))
          if (p.grad().defined()) max_grad = std::max(max_grad, p.grad().abs().max().item<double>());
      bool any = false;
      for (const auto& p : m->parameters_of(NetId::ContentEncI)) any |= p.grad().defined();
      image_side_reached &= any;
    };
    trainer.train_step(trainer.sample_batch(data), opts);
  }
  return {max_grad == 0.0 && image_side_reached,
          "20 batches, max |grad| on StyleEncL/ContentEncL/MapperL = " + fmt("%g", max_grad)};
}

Outcome inference_isolation() {
  seed_everything(4);
  LietModel model{NetConfig{}};
  model->reset_invocations();
  auto gen = at::detail::createCPUGenerator(9);
  for (int i = 0; i < 100; ++i) infer(model, FeatureMap(torch::rand({3, 64, 64}, gen), ValueRange::Unit));
  uint64_t lidar_side = 0;
  for (auto id : {NetId::StyleEncL, NetId::ContentEncL, NetId::MapperL, NetId::GenL, NetId::DiscL})
    lidar_side += model->invocations(id);
  const auto gr = model->invocations(NetId::GenR), gs = model->invocations(NetId::GenS);
  return {lidar_side == 0 && gr == 100 && gs == 100,
          "100 images: LiDAR-side invocations " + std::to_string(lidar_side) + ", GenR " + std::to_string(gr) +
              ", GenS " + std::to_string(gs)};
}

Outcome adain_statistics() {
  auto gen = at::detail::createCPUGenerator(55);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int64_t n = 2, c = 8;
    auto scale = torch::rand({n, c, 1, 1}, gen) * 3 + 0.1;  // std in [0.1, 3.1] so var >= 1e-2
    auto f = torch::randn({n, c, 16, 16}, gen) * scale + torch::randn({n, c, 1, 1}, gen) * 5;
    auto gamma = torch::rand({n, c}, gen) * 2 + 0.1;
    auto beta = torch::randn({n, c}, gen);
    auto out = adain(f, gamma, beta);
    for (int64_t i = 0; i < n; ++i) {
      const auto stats = oracle::channel_stats(out[i]);
      const auto in_stats = oracle::channel_stats(f[i]);
      for (int64_t k = 0; k < c; ++k) {
        if (in_stats[k].second * in_stats[k].second < 1e-2) continue;
        worst = std::max(worst, std::abs(stats[k].first - beta[i][k].item<double>()));
        worst = std::max(worst, std::abs(stats[k].second - gamma[i][k].item<double>()));
      }
    }
  }
  return {worst <= 1e-3, "max deviation from (beta, gamma) " + fmt("%.2e", worst)};
}

double window_mean(const std::vector<LossReport>& r, size_t from, size_t to, double LossReport::*field) {
  double s = 0.0;
  for (size_t i = from; i < to; ++i) s += r[i].*field;
  return s / static_cast<double>(to - from);
}

Outcome overfit_smoke() {
  const auto t0 = std::chrono::steady_clock::now();
  SceneSpec spec;
  auto data = training_data(make_synthetic_dataset(spec, 8, 8, 10));
  TrainConfig cfg;
  cfg.max_iters = 300;
  cfg.checkpoint_every = 0;
  Trainer trainer(NetConfig{}, cfg);
  const auto reports = fit(trainer, data);
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
  const size_t n = reports.size();
  const double total_start = window_mean(reports, 0, 50, &LossReport::total);
  const double total_end = window_mean(reports, n - 50, n, &LossReport::total);
  const double img10 = reports[9].img, phy10 = reports[9].phy;
  const double img_end = window_mean(reports, n - 50, n, &LossReport::img);
  const double phy_end = window_mean(reports, n - 50, n, &LossReport::phy);
  const bool pass = n == 300 && total_end < total_start && img_end <= 0.5 * img10 && phy_end <= 0.5 * phy10 &&
                    minutes <= 15.0;
  std::ostringstream os;
  os << "total " << fmt("%.4g", total_start) << " -> " << fmt("%.4g", total_end) << "; img it10 "
     << fmt("%.4f", img10) << " end " << fmt("%.4f", img_end) << " (" << fmt("%.0f", 100 * img_end / img10)
     << "%); phy it10 " << fmt("%.4f", phy10) << " end " << fmt("%.4f", phy_end) << " ("
     << fmt("%.0f", 100 * phy_end / phy10) << "%); " << fmt("%.1f", minutes) << " min";
  return {pass, os.str()};
}

Outcome metric_oracles() {
  auto data = make_synthetic_dataset(SceneSpec{}, 20, 70, 100);
  EvalSettings st;
  st.mode = EvalMode::All;
  auto rep = evaluate_predictions(
      data, [](const PairedSample& s) { return DecompositionResult{*s.gt_albedo, *s.gt_shade}; }, st);
  auto two = torch::full({3, 4, 4}, 0.25);
  two.narrow(2, 2, 2).fill_(0.5);
  Judgment right{1, 0, 2, 3, JudgmentLabel::ADarker, 1.0};
  Judgment wrong{1, 0, 2, 3, JudgmentLabel::Equal, 3.0};
  const double hand = whdr(two, {right, wrong});
  return {rep.whdr <= 0.05 && rep.f_score >= 0.95 && hand == 0.75,
          "GT albedo on 20 scenes: WHDR " + fmt("%.4f", rep.whdr) + ", F " + fmt("%.4f", rep.f_score) +
              "; hand example " + fmt("%.17g", hand)};
}

Outcome alignment_ablation() {
  const auto t0 = std::chrono::steady_clock::now();
  SceneSpec spec;
  spec.shadow_attenuation = {0.4, 0.4};
  const auto ds = make_synthetic_dataset(spec, 32, 800, 50);
  const auto data = training_data(ds);
  int wins = 0;
  std::ostringstream os;
  for (uint64_t seed : {1, 2, 3}) {
    double contrast[2] = {0, 0};
    for (int with_aa = 1; with_aa >= 0; --with_aa) {
      TrainConfig cfg;
      cfg.seed = seed;
      cfg.max_iters = 500;
      cfg.checkpoint_every = 0;
      cfg.weights.aa = with_aa ? 100.0 : 0.0;
      auto trainer = fit(NetConfig{}, cfg, data);
      EvalSettings st;
      const auto rep = evaluate_model(trainer->model(), ds, st);
      contrast[with_aa] = rep.shadow_contrast.value_or(std::nan(""));
    }
    const bool win = std::abs(contrast[1] - 1.0) < std::abs(contrast[0] - 1.0);
    wins += win ? 1 : 0;
    os << "seed " << seed << ": AA " << fmt("%.3f", contrast[1]) << " vs no-AA " << fmt("%.3f", contrast[0])
       << (win ? " (closer)" : " (not closer)") << "; ";
  }
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
  os << wins << "/3 seeds, " << fmt("%.1f", minutes) << " min";
  return {wins >= 2 && minutes <= 90.0, os.str()};
}

Outcome determinism_persistence() {
  NetConfig net;
  TrainConfig cfg;
  cfg.max_iters = 50;
  cfg.checkpoint_every = 0;
  cfg.seed = 21;
  SceneSpec spec;
  spec.size = 32;
  const auto ds = make_synthetic_dataset(spec, 8, 21, 20);
  const auto data = training_data(ds);
  std::vector<std::string> streams[2];
  std::unique_ptr<Trainer> last;
  for (int k = 0; k < 2; ++k) {
    FitOptions opts;
    std::vector<std::string>* out = &streams[k];
    opts.on_step = [out](const LossReport& r) { out->push_back(r.to_json_line()); };
    last = fit(net, cfg, data, opts);
  }
  const bool same_stream = streams[0].size() == 50 && streams[0] == streams[1];

  const auto dir = work_dir("persist");
  last->save_checkpoint(dir / "a.liet");
  auto loaded = Trainer::load_checkpoint(dir / "a.liet");
  loaded->save_checkpoint(dir / "b.liet");
  auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  const bool same_bytes = slurp(dir / "a.liet") == slurp(dir / "b.liet");

  write_dataset(dir / "data", ds);
  const auto back = read_dataset(dir / "data");
  double img_err = 0.0, lidar_err = 0.0;
  bool shapes_ok = back.samples.size() == ds.samples.size();
  for (size_t i = 0; shapes_ok && i < ds.samples.size(); ++i) {
    img_err = std::max(img_err, (ds.samples[i].image.tensor() - back.samples[i].image.tensor()).abs().max().item<double>());
    lidar_err = std::max(lidar_err, (ds.samples[i].lidar.intensity.tensor() - back.samples[i].lidar.intensity.tensor())
                                        .abs()
                                        .max()
                                        .item<double>());
  }
  fs::remove_all(dir);
  const bool roundtrip = shapes_ok && img_err <= 1.0 / 255 && lidar_err <= 1.0 / 65535;
  return {same_stream && same_bytes && roundtrip,
          std::string("50-step loss streams ") + (same_stream ? "identical" : "DIFFER") + "; save/load/save " +
              (same_bytes ? "byte-identical" : "DIFFERS") + "; dataset max err image " + fmt("%.2e", img_err) +
              " lidar " + fmt("%.2e", lidar_err)};
}

Outcome phenomenology() {
  const auto scenes = generate_scenes(SceneSpec{}, 100, 1000);
  // Within-region correlation: values are relative to their region mean and
  // the shadow indicator is centered per region, then everything is pooled.
  std::vector<double> lid, lid_sh, lum, lum_sh;
  auto pool_region = [](const std::vector<double>& v, const std::vector<double>& s, std::vector<double>& out_v,
                        std::vector<double>& out_s) {
    if (v.size() < 2) return;
    double mv = 0, ms = 0;
    for (size_t i = 0; i < v.size(); ++i) {
      mv += v[i];
      ms += s[i];
    }
    mv /= static_cast<double>(v.size());
    ms /= static_cast<double>(v.size());
    if (ms == 0.0 || ms == 1.0 || mv <= 0.0) return;
    for (size_t i = 0; i < v.size(); ++i) {
      out_v.push_back(v[i] / mv - 1.0);
      out_s.push_back(s[i] - ms);
    }
  };
  for (const auto& g : scenes) {
    const auto& s = g.sample;
    const auto gray = to_grayscale(s.image.tensor()).to(torch::kFloat64).contiguous();
    const auto inten = s.lidar.intensity.tensor().to(torch::kFloat64).contiguous();
    const auto mask = s.lidar.mask.to(torch::kFloat64).contiguous();
    const auto shadow = s.gt_shadow_mask->to(torch::kFloat64).contiguous();
    const auto labels = g.info.region_labels.contiguous();
    auto G = gray.accessor<double, 3>(), L = inten.accessor<double, 3>(), M = mask.accessor<double, 3>(),
         S = shadow.accessor<double, 3>();
    auto R = labels.accessor<int64_t, 2>();
    std::map<int64_t, std::array<std::vector<double>, 4>> regions;
    for (int64_t y = 0; y < labels.size(0); ++y)
      for (int64_t x = 0; x < labels.size(1); ++x) {
        auto& reg = regions[R[y][x]];
        reg[0].push_back(G[0][y][x]);
        reg[1].push_back(S[0][y][x]);
        if (M[0][y][x] > 0.5) {
          reg[2].push_back(L[0][y][x]);
          reg[3].push_back(S[0][y][x]);
        }
      }
    for (auto& [id, reg] : regions) {
      pool_region(reg[0], reg[1], lum, lum_sh);
      pool_region(reg[2], reg[3], lid, lid_sh);
    }
  }
  const double r_lidar = oracle::pearson(lid, lid_sh);
  const double r_image = oracle::pearson(lum, lum_sh);
  return {std::abs(r_lidar) < 0.1 && std::abs(r_image) > 0.5,
          "100 scenes, within equal-albedo regions: corr(lidar, shadow) " + fmt("%+.4f", r_lidar) +
              ", corr(image luminance, shadow) " + fmt("%+.4f", r_image)};
}

const std::vector<std::pair<int, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<int, std::function<Outcome()>>> all{
      {1, loss_oracles},         {2, gradient_suite},     {3, stop_gradient},
      {4, inference_isolation},  {5, adain_statistics},   {6, overfit_smoke},
      {7, metric_oracles},       {8, alignment_ablation}, {9, determinism_persistence},
      {10, phenomenology}};
  return all;
}

}  // namespace
}  // namespace liet

int main(int argc, char** argv) {
  CLI::App app{"liet acceptance criteria"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "Criterion number(s) to run; default all")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  torch::set_num_threads(1);
  bool all_pass = true;
  for (const auto& [id, fn] : liet::criteria()) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    liet::Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " " << o.detail << " ("
              << liet::fmt("%.1f", secs) << "s)" << std::endl;
    all_pass &= o.pass;
  }
  return all_pass ? 0 : 1;
}
