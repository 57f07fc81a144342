// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "liet/dataset_io.hpp"
#include "liet/losses.hpp"
#include "liet/pipeline.hpp"
#include "liet/seeding.hpp"
#include "liet/trainer.hpp"

namespace liet {
namespace {

void BM_Infer(benchmark::State& state) {
  torch::set_num_threads(1);
  seed_everything(1);
  LietModel model{NetConfig{}};
  const auto size = state.range(0);
  FeatureMap x(torch::rand({3, size, size}), ValueRange::Unit);
  for (auto _ : state) benchmark::DoNotOptimize(infer(model, x).albedo.tensor().data_ptr());
}
BENCHMARK(BM_Infer)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TrainingForward(benchmark::State& state) {
  torch::set_num_threads(1);
  seed_everything(2);
  LietModel model{NetConfig{}};
  const auto size = state.range(0);
  TrainingBatch b;
  b.x_i = torch::rand({2, 3, size, size});
  b.m_l = (torch::rand({2, 1, size, size}) > 0.5).to(torch::kFloat32);
  b.x_l = torch::rand({2, 1, size, size}) * b.m_l;
  b.x_r = torch::rand({2, 3, size, size});
  b.x_s = torch::rand({2, 3, size, size});
  torch::NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(training_forward(model, b, PipelineSwitches{}).image.x_ri.data_ptr());
}
BENCHMARK(BM_TrainingForward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  torch::set_num_threads(1);
  SceneSpec spec;
  spec.size = state.range(0);
  const auto ds = make_synthetic_dataset(spec, 4, 3, 10);
  const auto data = TrainingData::from_samples(ds.samples, ds.albedo_pool.maps, ds.shade_pool.maps);
  Trainer trainer(NetConfig{}, TrainConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(trainer.train_step(trainer.sample_batch(data)).total);
}
BENCHMARK(BM_TrainStep)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond)->Iterations(5);

void BM_LossAa(benchmark::State& state) {
  auto a = torch::rand({2, 3, 64, 64}), b = torch::rand({2, 3, 64, 64});
  auto m = (torch::rand({2, 1, 64, 64}) > 0.5).to(torch::kFloat32);
  for (auto _ : state) benchmark::DoNotOptimize(loss_aa(a, b, m).item<float>());
}
BENCHMARK(BM_LossAa);

void BM_GenerateScene(benchmark::State& state) {
  SceneSpec spec;
  for (auto _ : state) {
    spec.seed++;
    benchmark::DoNotOptimize(generate_scene(spec).image.tensor().data_ptr());
  }
}
BENCHMARK(BM_GenerateScene)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace liet

BENCHMARK_MAIN();
