// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace liet {

/// Seeds libtorch's global generator and, when `deterministic` is set, pins
/// intra-op parallelism to one thread so reductions run in a fixed order.
void seed_everything(uint64_t seed, bool deterministic = true);

/// Splits one user-facing seed into independent child streams.
uint64_t derive_seed(uint64_t seed, uint64_t stream);

using Rng = std::mt19937_64;

std::string serialize_rng(const Rng& rng);
Rng deserialize_rng(const std::string& state);

}  // namespace liet
