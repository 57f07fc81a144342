// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

// liet: generate-data | train | infer | eval.
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime abort.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "liet/dataset_io.hpp"
#include "liet/evalkit.hpp"
#include "liet/pipeline.hpp"
#include "liet/run_config.hpp"
#include "liet/trainer.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kUsage = 1;
constexpr int kRuntime = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void apply_ablation(const std::string& name, liet::AblationFlags& a) {
  static const std::map<std::string, bool liet::AblationFlags::*> kFlags{
      {"no_aa", &liet::AblationFlags::no_aa},   {"no_inst", &liet::AblationFlags::no_instance_norm},
      {"no_gray", &liet::AblationFlags::no_gray}, {"no_ilc", &liet::AblationFlags::no_ilc},
      {"with_smooth", &liet::AblationFlags::with_smooth}};
  auto it = kFlags.find(name);
  if (it == kFlags.end()) throw UsageError("unknown ablation '" + name + "'");
  a.*(it->second) = true;
}

int run_generate(const fs::path& out, int64_t n, uint64_t seed, int64_t size) {
  liet::SceneSpec spec;
  spec.size = size;
  spec.validate();
  auto data = liet::make_synthetic_dataset(spec, n, seed);
  liet::write_dataset(out, data);
  std::cout << "wrote " << n << " scenes to " << out.string() << "\n";
  return 0;
}

int run_train(const fs::path& config, const fs::path& data_dir, const fs::path& out,
              const std::vector<std::string>& ablations) {
  auto cfg = liet::parse_config(config);
  for (const auto& a : ablations) apply_ablation(a, cfg.train.ablation);
  cfg.data.dir = data_dir.string();
  liet::write_resolved_config(cfg, out);

  auto dataset = liet::read_dataset(data_dir);
  auto data = liet::TrainingData::from_samples(dataset.samples, dataset.albedo_pool.maps, dataset.shade_pool.maps);
  liet::Trainer trainer(cfg.net, cfg.train);

  std::ofstream log(out / "train_log.jsonl");
  if (!log) throw std::runtime_error("cannot write " + (out / "train_log.jsonl").string());
  liet::FitOptions opts;
  opts.checkpoint_dir = out;
  opts.log = &log;
  try {
    liet::fit(trainer, data, opts);
  } catch (const liet::NonFiniteLoss& e) {
    std::cerr << "liet train: aborted at iteration " << trainer.iteration() + 1 << ": " << e.what() << "\n";
    return kRuntime;
  }
  trainer.save_checkpoint(out / "final.liet");
  std::cout << "trained " << trainer.iteration() << " iterations; checkpoint " << (out / "final.liet").string()
            << "\n";
  return 0;
}

int run_infer(const fs::path& ckpt, const fs::path& image, const fs::path& albedo_out, const fs::path& shade_out) {
  auto trainer = liet::Trainer::load_checkpoint(ckpt);
  auto x = liet::read_png(image);
  if (x.size(0) == 1) x = x.repeat({3, 1, 1});
  auto result = liet::infer(trainer->model(), liet::FeatureMap(x, liet::ValueRange::Unit));
  liet::write_png(albedo_out, result.albedo.tensor(), 8);
  liet::write_png(shade_out, result.shade.tensor(), 8);
  return 0;
}

int run_eval(const fs::path& ckpt, const fs::path& data_dir, const std::string& mode, const fs::path& report,
             const std::optional<int64_t>& k, const std::optional<uint64_t>& seed) {
  auto trainer = liet::Trainer::load_checkpoint(ckpt);
  auto dataset = liet::read_dataset(data_dir);
  liet::EvalSettings settings;
  settings.mode = liet::eval_mode_from_name(mode);
  if (k) {
    if (*k <= 0) throw UsageError("--k must be positive");
    settings.k_per_image = *k;
  }
  if (seed) settings.sample_seed = *seed;
  auto r = liet::evaluate_model(trainer->model(), dataset, settings);
  if (report.has_parent_path()) fs::create_directories(report.parent_path());
  std::ofstream f(report);
  if (!f) throw std::runtime_error("cannot write " + report.string());
  f << r.to_json() << "\n";
  std::cout << r.to_json() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"liet: intrinsic decomposition trained with LiDAR intensity"};
  app.require_subcommand(1);

  fs::path gen_out;
  int64_t gen_n = 0, gen_size = 64;
  uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("generate-data", "Write a procedural dataset");
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--n", gen_n, "Number of scenes")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Base seed")->required();
  gen->add_option("--size", gen_size, "Image side length (multiple of 4)")->required()->check(CLI::PositiveNumber);

  fs::path tr_config, tr_data, tr_out;
  std::vector<std::string> tr_ablation;
  auto* tr = app.add_subcommand("train", "Train a model into a run directory");
  tr->add_option("--config", tr_config, "Run configuration JSON")->required()->check(CLI::ExistingFile);
  tr->add_option("--data", tr_data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  tr->add_option("--out", tr_out, "Run directory")->required();
  tr->add_option("--ablation", tr_ablation, "no_aa|no_inst|no_gray|no_ilc|with_smooth")
      ->check(CLI::IsMember({"no_aa", "no_inst", "no_gray", "no_ilc", "with_smooth"}));

  fs::path in_ckpt, in_image, in_albedo, in_shade;
  auto* inf = app.add_subcommand("infer", "Decompose one image");
  inf->add_option("--ckpt", in_ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  inf->add_option("--image", in_image, "Input PNG")->required()->check(CLI::ExistingFile);
  inf->add_option("--albedo", in_albedo, "Output albedo PNG")->required();
  inf->add_option("--shade", in_shade, "Output shade PNG")->required();

  fs::path ev_ckpt, ev_data, ev_report;
  std::string ev_mode;
  std::optional<int64_t> ev_k;
  std::optional<uint64_t> ev_seed;
  auto* ev = app.add_subcommand("eval", "Score a checkpoint against pairwise judgments");
  ev->add_option("--ckpt", ev_ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  ev->add_option("--data", ev_data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--mode", ev_mode, "random|all")->required()->check(CLI::IsMember({"random", "all"}));
  ev->add_option("--report", ev_report, "Report JSON path")->required();
  ev->add_option("--k", ev_k, "Judgments per image in random mode");
  ev->add_option("--seed", ev_seed, "Sampling seed in random mode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*gen) return run_generate(gen_out, gen_n, gen_seed, gen_size);
    if (*tr) return run_train(tr_config, tr_data, tr_out, tr_ablation);
    if (*inf) return run_infer(in_ckpt, in_image, in_albedo, in_shade);
    if (*ev) return run_eval(ev_ckpt, ev_data, ev_mode, ev_report, ev_k, ev_seed);
  } catch (const UsageError& e) {
    std::cerr << "liet: " << e.what() << "\n";
    return kUsage;
  } catch (const liet::ConfigError& e) {
    std::cerr << "liet: config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "liet: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
