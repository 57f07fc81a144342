// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#include "liet/dataset_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <memory>

#include "liet/seeding.hpp"

namespace liet {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  auto* err = static_cast<std::string*>(png_get_error_ptr(png));
  if (err) *err = msg;
  png_longjmp(png, 1);
}

json read_json_file(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw LoadError(path.string() + ": cannot open");
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw LoadError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << j.dump(2) << "\n";
}

json judgments_to_json(const JudgmentSet& js) {
  json arr = json::array();
  for (const auto& j : js) {
    arr.push_back({{"a", {j.ya, j.xa}}, {"b", {j.yb, j.xb}}, {"label", label_name(j.label)}, {"weight", j.weight}});
  }
  return arr;
}

JudgmentSet judgments_from_json(const json& arr, const fs::path& origin, int64_t h, int64_t w) {
  JudgmentSet out;
  try {
    for (const auto& e : arr) {
      Judgment j;
      j.ya = e.at("a").at(0).get<int64_t>();
      j.xa = e.at("a").at(1).get<int64_t>();
      j.yb = e.at("b").at(0).get<int64_t>();
      j.xb = e.at("b").at(1).get<int64_t>();
      j.label = label_from_name(e.at("label").get<std::string>());
      j.weight = e.at("weight").get<double>();
      if (j.ya < 0 || j.ya >= h || j.yb < 0 || j.yb >= h || j.xa < 0 || j.xa >= w || j.xb < 0 || j.xb >= w) {
        throw LoadError(origin.string() + ": judgment point out of bounds");
      }
      if (!(j.weight > 0.0)) throw LoadError(origin.string() + ": judgment weight must be > 0");
      out.push_back(j);
    }
  } catch (const json::exception& e) {
    throw LoadError(origin.string() + ": malformed judgments (" + e.what() + ")");
  }
  return out;
}

}  // namespace

void write_png(const fs::path& path, const torch::Tensor& map, int bit_depth) {
  require(map.dim() == 3 && (map.size(0) == 1 || map.size(0) == 3), "write_png: expected [1|3,H,W]");
  require(bit_depth == 8 || bit_depth == 16, "write_png: bit depth must be 8 or 16");
  const auto c = map.size(0), h = map.size(1), w = map.size(2);
  const double maxv = bit_depth == 8 ? 255.0 : 65535.0;
  const auto hwc = map.detach().to(torch::kFloat64).clamp(0.0, 1.0).permute({1, 2, 0}).contiguous();
  const auto* src = hwc.data_ptr<double>();
  const size_t bytes_per_sample = bit_depth / 8;
  std::vector<png_byte> buf(static_cast<size_t>(h * w * c) * bytes_per_sample);
  for (int64_t i = 0; i < h * w * c; ++i) {
    const auto q = static_cast<uint32_t>(std::lround(src[i] * maxv));
    if (bit_depth == 8) {
      buf[static_cast<size_t>(i)] = static_cast<png_byte>(q);
    } else {  // PNG stores 16-bit samples big endian
      buf[static_cast<size_t>(2 * i)] = static_cast<png_byte>(q >> 8);
      buf[static_cast<size_t>(2 * i + 1)] = static_cast<png_byte>(q & 0xff);
    }
  }

  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw std::runtime_error("write_png: cannot open " + path.string());
  std::string err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_fail, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("write_png: " + path.string() + ": " + err);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), bit_depth,
               c == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const size_t stride = static_cast<size_t>(w * c) * bytes_per_sample;
  for (int64_t y = 0; y < h; ++y) png_write_row(png, buf.data() + static_cast<size_t>(y) * stride);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

torch::Tensor read_png(const fs::path& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw LoadError(path.string() + ": cannot open");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw LoadError(path.string() + ": not a PNG file");
  }
  std::string err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_fail, nullptr);
  png_infop info = png_create_info_struct(png);
  std::vector<png_byte> buf;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw LoadError(path.string() + ": " + err);
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const auto w = static_cast<int64_t>(png_get_image_width(png, info));
  const auto h = static_cast<int64_t>(png_get_image_height(png, info));
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  const auto channels = static_cast<int64_t>(png_get_channels(png, info));
  const size_t stride = png_get_rowbytes(png, info);
  buf.resize(stride * static_cast<size_t>(h));
  for (int64_t y = 0; y < h; ++y) png_read_row(png, buf.data() + static_cast<size_t>(y) * stride, nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  auto out = torch::empty({h, w, channels}, torch::kFloat32);
  auto* dst = out.data_ptr<float>();
  const int64_t n = h * w * channels;
  if (out_depth == 16) {
    for (int64_t i = 0; i < n; ++i) {
      const auto hi = buf[static_cast<size_t>(2 * i)], lo = buf[static_cast<size_t>(2 * i + 1)];
      dst[i] = static_cast<float>(((hi << 8) | lo) / 65535.0);
    }
  } else {
    for (int64_t i = 0; i < n; ++i) dst[i] = static_cast<float>(buf[static_cast<size_t>(i)] / 255.0);
  }
  return out.permute({2, 0, 1}).contiguous();
}

// ---------------------------------------------------------------------------

void write_dataset(const fs::path& dir, const Dataset& data) {
  require(data.judgments.empty() || data.judgments.size() == data.samples.size(),
          "write_dataset: judgments must be empty or parallel to samples");
  fs::create_directories(dir);
  json samples = json::array();
  for (size_t i = 0; i < data.samples.size(); ++i) {
    const auto& s = data.samples[i];
    const auto& id = s.sample_id;
    json files;
    files["image"] = id + "_image.png";
    write_png(dir / files["image"].get<std::string>(), s.image.tensor(), 8);
    files["lidar"] = id + "_lidar.png";
    write_png(dir / files["lidar"].get<std::string>(), s.lidar.intensity.tensor(), 16);
    files["lidar_mask"] = id + "_lidar_mask.png";
    write_png(dir / files["lidar_mask"].get<std::string>(), s.lidar.mask, 8);
    if (s.gt_albedo) {
      files["albedo"] = id + "_albedo.png";
      write_png(dir / files["albedo"].get<std::string>(), s.gt_albedo->tensor(), 8);
    }
    if (s.gt_shade) {
      files["shade"] = id + "_shade.png";
      write_png(dir / files["shade"].get<std::string>(), s.gt_shade->tensor(), 8);
    }
    if (s.gt_shadow_mask) {
      files["shadow_mask"] = id + "_shadow_mask.png";
      write_png(dir / files["shadow_mask"].get<std::string>(), *s.gt_shadow_mask, 8);
    }
    if (!data.judgments.empty()) {
      files["judgments"] = id + "_judgments.json";
      write_json_file(dir / files["judgments"].get<std::string>(), judgments_to_json(data.judgments[i]));
    }
    samples.push_back({{"id", id}, {"files", files}});
  }
  auto pool_json = [&](const DomainPool& pool) {
    json arr = json::array();
    for (size_t i = 0; i < pool.maps.size(); ++i) {
      const auto file = pool.ids[i] + ".png";
      write_png(dir / file, pool.maps[i].tensor(), 8);
      arr.push_back({{"id", pool.ids[i]}, {"file", file}});
    }
    return arr;
  };
  json manifest;
  manifest["version"] = kManifestVersion;
  manifest["samples"] = samples;
  manifest["pools"] = {{"albedo", pool_json(data.albedo_pool)}, {"shade", pool_json(data.shade_pool)}};
  write_json_file(dir / "manifest.json", manifest);
}

Dataset read_dataset(const fs::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  const auto manifest = read_json_file(manifest_path);
  const auto bad = [&](const std::string& why) -> LoadError {
    return LoadError(manifest_path.string() + ": " + why);
  };
  if (!manifest.contains("version") || manifest["version"] != kManifestVersion) {
    throw bad("missing or unsupported version");
  }
  if (!manifest.contains("samples") || !manifest["samples"].is_array()) throw bad("missing samples array");

  auto load = [&](const fs::path& file, int64_t channels) {
    if (!fs::exists(file)) throw LoadError(file.string() + ": listed in manifest but missing");
    auto t = read_png(file);
    if (t.size(0) != channels) {
      throw LoadError(file.string() + ": expected " + std::to_string(channels) + " channels");
    }
    return t;
  };
  auto file_of = [&](const json& files, const char* key, const std::string& id) -> std::string {
    if (!files.contains(key) || !files[key].is_string()) {
      throw bad("sample '" + id + "' lacks a '" + key + "' file entry");
    }
    return files[key].get<std::string>();
  };

  Dataset data;
  bool any_judgments = false;
  for (const auto& entry : manifest["samples"]) {
    if (!entry.contains("id") || !entry.contains("files")) throw bad("sample entry without id/files");
    PairedSample s;
    s.sample_id = entry["id"].get<std::string>();
    const auto& files = entry["files"];
    s.image = FeatureMap(load(dir / file_of(files, "image", s.sample_id), 3), ValueRange::Unit);
    auto intensity = load(dir / file_of(files, "lidar", s.sample_id), 1);
    auto mask = load(dir / file_of(files, "lidar_mask", s.sample_id), 1);
    if (intensity.sizes() != mask.sizes() || intensity.size(1) != s.height() || intensity.size(2) != s.width()) {
      throw bad("sample '" + s.sample_id + "' has inconsistent map sizes");
    }
    s.lidar = LidarMap::make(intensity, mask);
    auto same_size = [&](const torch::Tensor& t, const char* what) {
      if (t.size(1) != s.height() || t.size(2) != s.width()) {
        throw bad("sample '" + s.sample_id + "' " + what + " size differs from image");
      }
      return t;
    };
    if (files.contains("albedo"))
      s.gt_albedo = FeatureMap(same_size(load(dir / file_of(files, "albedo", s.sample_id), 3), "albedo"), ValueRange::Unit);
    if (files.contains("shade"))
      s.gt_shade = FeatureMap(same_size(load(dir / file_of(files, "shade", s.sample_id), 3), "shade"), ValueRange::Unit);
    if (files.contains("shadow_mask"))
      s.gt_shadow_mask = (same_size(load(dir / file_of(files, "shadow_mask", s.sample_id), 1), "shadow mask") > 0.5)
                             .to(torch::kFloat32);
    JudgmentSet js;
    if (files.contains("judgments")) {
      any_judgments = true;
      const auto jpath = dir / file_of(files, "judgments", s.sample_id);
      js = judgments_from_json(read_json_file(jpath), jpath, s.height(), s.width());
    }
    data.judgments.push_back(std::move(js));
    data.samples.push_back(std::move(s));
  }
  if (!any_judgments) data.judgments.clear();

  auto read_pool = [&](const char* key, DomainPool& pool) {
    if (!manifest.contains("pools") || !manifest["pools"].contains(key)) return;
    for (const auto& e : manifest["pools"][key]) {
      if (!e.contains("id") || !e.contains("file")) throw bad(std::string("pool '") + key + "' entry without id/file");
      pool.ids.push_back(e["id"].get<std::string>());
      pool.maps.emplace_back(load(dir / e["file"].get<std::string>(), 3), ValueRange::Unit);
    }
  };
  read_pool("albedo", data.albedo_pool);
  read_pool("shade", data.shade_pool);
  return data;
}

Dataset make_synthetic_dataset(const SceneSpec& spec, int64_t n, uint64_t seed, int64_t n_pairs, double delta,
                               double equal_band) {
  require(n >= 1, "make_synthetic_dataset: n must be >= 1");
  Dataset data;
  auto scenes = generate_scenes(spec, n, derive_seed(seed, 1));
  for (size_t i = 0; i < scenes.size(); ++i) {
    data.judgments.push_back(generate_annotations(scenes[i].sample, n_pairs, delta, equal_band,
                                                  derive_seed(seed, 100 + i)));
    data.samples.push_back(std::move(scenes[i].sample));
  }
  data.albedo_pool = generate_domain_pool(PoolKind::Albedo, n, derive_seed(seed, 2), spec);
  data.shade_pool = generate_domain_pool(PoolKind::Shade, n, derive_seed(seed, 3), spec);
  return data;
}

}  // namespace liet
