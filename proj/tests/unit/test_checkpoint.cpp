// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "liet/checkpoint.hpp"

namespace liet {
namespace {

uint32_t bitwise_crc32(const std::string& s) {
  uint32_t crc = 0xFFFFFFFFu;
  for (unsigned char c : s) {
    crc ^= c;
    for (int k = 0; k < 8; ++k) crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
  }
  return ~crc;
}

template <typename T>
void put_le(std::string& out, T v) {
  for (size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((static_cast<uint64_t>(v) >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float f) {
  uint32_t u;
  std::memcpy(&u, &f, 4);
  put_le(out, u);
}

TEST(Archive, ByteLayoutMatchesHandEncoding) {
  auto t = torch::tensor({1.0f, -2.5f, 0.125f, 3.0f, 0.0f, 7.75f}).view({2, 3});
  const std::string json = R"({"k":1})";
  std::string expect = "LIET";
  put_le<uint32_t>(expect, 1);
  put_le<uint64_t>(expect, 1);
  put_le<uint32_t>(expect, 3);
  expect += "w.a";
  expect.push_back(1);
  put_le<uint32_t>(expect, 2);
  put_le<uint64_t>(expect, 2);
  put_le<uint64_t>(expect, 3);
  for (float f : {1.0f, -2.5f, 0.125f, 3.0f, 0.0f, 7.75f}) put_f32(expect, f);
  put_le<uint64_t>(expect, json.size());
  expect += json;
  put_le<uint32_t>(expect, bitwise_crc32(expect));
  EXPECT_EQ(encode_tensor_archive({{"w.a", t}}, json), expect);
}

TEST(Archive, RoundTripPreservesOrderAndValues) {
  std::vector<std::pair<std::string, torch::Tensor>> entries{
      {"z", torch::randn({3, 2, 2})}, {"a", torch::randn({5})}, {"scalar", torch::tensor(2.0f)}};
  auto bytes = encode_tensor_archive(entries, "{}");
  auto back = decode_tensor_archive(bytes);
  ASSERT_EQ(back.entries.size(), 3u);
  EXPECT_EQ(back.entries[0].first, "z");
  EXPECT_TRUE(torch::equal(back.tensors.at("a"), entries[1].second));
  EXPECT_EQ(back.tensors.at("scalar").dim(), 0);
  EXPECT_EQ(back.json, "{}");
  EXPECT_EQ(encode_tensor_archive(back.entries, back.json), bytes);
}

TEST(Archive, ConvertsToFloat32) {
  auto back = decode_tensor_archive(encode_tensor_archive({{"d", torch::ones({2}, torch::kFloat64)}}, ""));
  EXPECT_EQ(back.tensors.at("d").scalar_type(), torch::kFloat32);
}

class ArchiveCorruption : public ::testing::Test {
 protected:
  std::string good = encode_tensor_archive({{"w", torch::randn({4, 4})}}, R"({"x":1})");
};

TEST_F(ArchiveCorruption, BadMagic) {
  auto b = good;
  b[0] = 'X';
  EXPECT_THROW(decode_tensor_archive(b), LoadError);
}

TEST_F(ArchiveCorruption, EveryHeaderByteFlipIsDetected) {
  for (size_t i = 0; i < 40; ++i) {
    auto b = good;
    b[i] = static_cast<char>(b[i] ^ 0x5A);
    EXPECT_THROW(decode_tensor_archive(b), LoadError) << "byte " << i;
  }
}

TEST_F(ArchiveCorruption, PayloadFlipFailsChecksum) {
  auto b = good;
  b[b.size() / 2] = static_cast<char>(b[b.size() / 2] ^ 1);
  EXPECT_THROW(decode_tensor_archive(b), LoadError);
}

TEST_F(ArchiveCorruption, TruncationAndTrailingBytes) {
  for (size_t n : {size_t{0}, size_t{3}, size_t{11}, good.size() - 1}) {
    EXPECT_THROW(decode_tensor_archive(good.substr(0, n)), LoadError) << n;
  }
  EXPECT_THROW(decode_tensor_archive(good + "x"), LoadError);
}

TEST_F(ArchiveCorruption, UnsupportedVersion) {
  auto b = good;
  b[4] = 2;
  EXPECT_THROW(decode_tensor_archive(b), LoadError);
}

TEST_F(ArchiveCorruption, ErrorNamesOrigin) {
  try {
    decode_tensor_archive("nope", "weights.liet");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("weights.liet"), std::string::npos);
  }
}

TEST(Archive, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "liet_archive_test.liet";
  write_tensor_archive(path.string(), {{"t", torch::arange(6).to(torch::kFloat32)}}, "{}");
  auto back = read_tensor_archive(path.string());
  EXPECT_TRUE(torch::equal(back.tensors.at("t"), torch::arange(6).to(torch::kFloat32)));
  std::filesystem::remove(path);
  EXPECT_THROW(read_tensor_archive(path.string()), LoadError);
}

}  // namespace
}  // namespace liet
