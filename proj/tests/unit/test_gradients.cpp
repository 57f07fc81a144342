// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "gradcheck.hpp"

namespace liet {
namespace {

TEST(Gradients, EveryLossMatchesCentralDifferences) {
  auto gen = at::detail::createCPUGenerator(77);
  for (auto& c : gradcheck::loss_cases(gen, gradcheck::double_extractor())) {
    auto r = gradcheck::check(c.fn, c.inputs);
    EXPECT_GT(r.checked, 0) << c.name;
    EXPECT_LE(r.max_rel_error, 1e-4) << c.name;
  }
}

TEST(Gradients, CheckerDetectsWrongGradient) {
  auto x = torch::rand({3, 4, 4}, torch::kFloat64) + 0.5;
  auto right = [](const std::vector<torch::Tensor>& v) { return v[0].pow(2).sum(); };
  EXPECT_LE(gradcheck::check(right, {x}).max_rel_error, 1e-6);
  // Same value, but the backward pass carries an extra constant 0.5.
  auto wrong = [](const std::vector<torch::Tensor>& v) {
    return v[0].pow(2).sum() + 0.5 * (v[0].sum() - v[0].sum().detach());
  };
  EXPECT_GT(gradcheck::check(wrong, {x}).max_rel_error, 1e-2);
}

}  // namespace
}  // namespace liet
