// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#include "liet/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace liet {
namespace {

static_assert(std::endian::native == std::endian::little, "archive I/O assumes a little-endian host");

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::string origin) : bytes_(bytes), origin_(std::move(origin)) {}

  template <typename T>
  T get(const char* what) {
    T v;
    need(sizeof(T), what);
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string get_bytes(size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  const char* cursor() const { return bytes_.data() + pos_; }
  void skip(size_t n, const char* what) { need(n, what); pos_ += n; }
  size_t pos() const { return pos_; }
  [[noreturn]] void fail(const std::string& msg) const { throw LoadError(origin_ + ": " + msg); }

 private:
  void need(size_t n, const char* what) const {
    if (n > bytes_.size() - pos_) fail(std::string("truncated while reading ") + what);
  }
  const std::string& bytes_;
  std::string origin_;
  size_t pos_ = 0;
};

uint32_t crc_of(const char* data, size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  while (n > 0) {
    const uInt chunk = static_cast<uInt>(std::min<size_t>(n, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<uint32_t>(crc);
}

}  // namespace

std::string encode_tensor_archive(const std::vector<std::pair<std::string, torch::Tensor>>& entries,
                                  const std::string& json) {
  std::string out;
  out.append(kArchiveMagic, 4);
  put<uint32_t>(out, kArchiveVersion);
  put<uint64_t>(out, entries.size());
  for (const auto& [name, tensor] : entries) {
    const auto t = tensor.detach().to(torch::kCPU, torch::kFloat32).contiguous();
    put<uint32_t>(out, static_cast<uint32_t>(name.size()));
    out.append(name);
    put<uint8_t>(out, kDtypeFloat32);
    put<uint32_t>(out, static_cast<uint32_t>(t.dim()));
    for (auto d : t.sizes()) put<uint64_t>(out, static_cast<uint64_t>(d));
    out.append(reinterpret_cast<const char*>(t.data_ptr<float>()), t.numel() * sizeof(float));
  }
  put<uint64_t>(out, json.size());
  out.append(json);
  put<uint32_t>(out, crc_of(out.data(), out.size()));
  return out;
}

TensorArchive decode_tensor_archive(const std::string& bytes, const std::string& origin) {
  Reader r(bytes, origin);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kArchiveMagic, 4) != 0) r.fail("bad magic");
  r.skip(4, "magic");
  const auto version = r.get<uint32_t>("version");
  if (version != kArchiveVersion) r.fail("unsupported version " + std::to_string(version));
  if (bytes.size() < 4 + 4 + 4) r.fail("truncated");
  const uint32_t stored_crc = [&] {
    uint32_t v;
    std::memcpy(&v, bytes.data() + bytes.size() - 4, 4);
    return v;
  }();
  if (crc_of(bytes.data(), bytes.size() - 4) != stored_crc) r.fail("checksum mismatch");

  TensorArchive archive;
  const auto count = r.get<uint64_t>("entry count");
  for (uint64_t i = 0; i < count; ++i) {
    const auto name_len = r.get<uint32_t>("name length");
    auto name = r.get_bytes(name_len, "name");
    const auto dtype = r.get<uint8_t>("dtype");
    if (dtype != kDtypeFloat32) r.fail("unknown dtype code " + std::to_string(dtype) + " for " + name);
    const auto rank = r.get<uint32_t>("rank");
    if (rank > 8) r.fail("implausible rank for " + name);
    std::vector<int64_t> dims;
    uint64_t numel = 1;
    for (uint32_t k = 0; k < rank; ++k) {
      const auto d = r.get<uint64_t>("dims");
      if (d > (1ull << 40) || (d != 0 && numel > (1ull << 40) / d)) r.fail("implausible dims for " + name);
      dims.push_back(static_cast<int64_t>(d));
      numel *= d;
    }
    const char* payload = r.cursor();
    r.skip(numel * sizeof(float), "payload");
    auto t = torch::empty(dims, torch::kFloat32);
    std::memcpy(t.data_ptr<float>(), payload, numel * sizeof(float));
    if (archive.tensors.count(name) != 0) r.fail("duplicate entry " + name);
    archive.tensors.emplace(name, t);
    archive.entries.emplace_back(std::move(name), t);
  }
  const auto json_len = r.get<uint64_t>("json length");
  archive.json = r.get_bytes(json_len, "json");
  r.skip(4, "checksum");
  if (r.pos() != bytes.size()) r.fail("trailing bytes after checksum");
  return archive;
}

void write_tensor_archive(const std::string& path,
                          const std::vector<std::pair<std::string, torch::Tensor>>& entries,
                          const std::string& json) {
  const auto bytes = encode_tensor_archive(entries, json);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

TensorArchive read_tensor_archive(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LoadError(path + ": cannot open");
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_tensor_archive(ss.str(), path);
}

}  // namespace liet
