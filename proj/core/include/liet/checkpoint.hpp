// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "liet/types.hpp"

namespace liet {

// Binary container shared by checkpoints and pretrained perceptual weights.
//
//   "LIET" | u32 version | u64 entry_count
//   entry*: u32 name_len | name (UTF-8) | u8 dtype | u32 rank | u64 dims[rank]
//           | float32 payload (little endian, row-major)
//   u64 json_len | json (UTF-8)
//   u32 crc32 over every preceding byte
//
// All integers are little endian.

inline constexpr char kArchiveMagic[4] = {'L', 'I', 'E', 'T'};
inline constexpr uint32_t kArchiveVersion = 1;
inline constexpr uint8_t kDtypeFloat32 = 1;

struct TensorArchive {
  std::vector<std::pair<std::string, torch::Tensor>> entries;  // file order
  std::map<std::string, torch::Tensor> tensors;                // lookup view of `entries`
  std::string json;
};

/// Tensors are converted to contiguous CPU float32 before writing.
std::string encode_tensor_archive(const std::vector<std::pair<std::string, torch::Tensor>>& entries,
                                  const std::string& json);
/// Parses the whole buffer before returning; throws LoadError on bad magic,
/// version, dtype, truncation, trailing bytes or checksum mismatch.
TensorArchive decode_tensor_archive(const std::string& bytes, const std::string& origin = "<memory>");

void write_tensor_archive(const std::string& path,
                          const std::vector<std::pair<std::string, torch::Tensor>>& entries,
                          const std::string& json);
TensorArchive read_tensor_archive(const std::string& path);

}  // namespace liet
