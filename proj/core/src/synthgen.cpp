// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#include "liet/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "liet/pixel_ops.hpp"
#include "liet/seeding.hpp"

namespace liet {
namespace {

constexpr double kShadeLo = 0.7;
constexpr double kShadeHi = 1.0;
constexpr double kLocalPairFraction = 0.3;
constexpr int64_t kLocalPairRadius = 6;

struct Point {
  double x, y;
};

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int64_t uniform_int(Rng& rng, int64_t lo, int64_t hi) {
  return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
}

bool inside_polygon(const std::vector<Point>& poly, double x, double y) {
  bool in = false;
  for (size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

std::vector<Point> random_polygon(Rng& rng, double size, double r_lo, double r_hi, int64_t v_lo,
                                  int64_t v_hi) {
  const Point c{uniform(rng, 0.0, size), uniform(rng, 0.0, size)};
  const auto n = uniform_int(rng, v_lo, v_hi);
  std::vector<double> angles(static_cast<size_t>(n));
  for (auto& a : angles) a = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  std::sort(angles.begin(), angles.end());
  std::vector<Point> poly;
  for (double a : angles) {
    const double r = uniform(rng, r_lo, r_hi) * size;
    poly.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  return poly;
}

// Row-major planar buffers, channel-first.
struct Planes {
  int64_t c, h, w;
  std::vector<float> v;
  Planes(int64_t c_, int64_t h_, int64_t w_, float fill = 0.f)
      : c(c_), h(h_), w(w_), v(static_cast<size_t>(c_ * h_ * w_), fill) {}
  float& at(int64_t ch, int64_t y, int64_t x) { return v[static_cast<size_t>((ch * h + y) * w + x)]; }
  float at(int64_t ch, int64_t y, int64_t x) const { return v[static_cast<size_t>((ch * h + y) * w + x)]; }
  torch::Tensor tensor() const {
    return torch::from_blob(const_cast<float*>(v.data()), {c, h, w}, torch::kFloat32).clone();
  }
};

struct AlbedoLayout {
  Planes albedo;
  std::vector<int64_t> labels;
};

AlbedoLayout paint_albedo(Rng& rng, const SceneSpec& spec) {
  const auto n = spec.size;
  AlbedoLayout out{Planes(3, n, n), std::vector<int64_t>(static_cast<size_t>(n * n), 0)};
  float base[3];
  for (auto& b : base) b = static_cast<float>(uniform(rng, 0.25, 0.9));
  for (int64_t y = 0; y < n; ++y)
    for (int64_t x = 0; x < n; ++x)
      for (int ch = 0; ch < 3; ++ch) out.albedo.at(ch, y, x) = base[ch];

  const auto shapes = uniform_int(rng, spec.n_shapes.lo, spec.n_shapes.hi);
  for (int64_t s = 0; s < shapes; ++s) {
    float color[3];
    for (auto& c : color) c = static_cast<float>(uniform(rng, 0.05, 0.95));
    const bool ellipse = uniform(rng, 0.0, 1.0) < 0.5;
    std::vector<Point> poly;
    double cx = 0, cy = 0, rx = 1, ry = 1, rot = 0;
    if (ellipse) {
      cx = uniform(rng, 0.0, n);
      cy = uniform(rng, 0.0, n);
      rx = uniform(rng, 0.08, 0.3) * n;
      ry = uniform(rng, 0.08, 0.3) * n;
      rot = uniform(rng, 0.0, std::numbers::pi);
    } else {
      poly = random_polygon(rng, static_cast<double>(n), 0.1, 0.35, 3, 6);
    }
    const double cr = std::cos(rot), sr = std::sin(rot);
    for (int64_t y = 0; y < n; ++y) {
      for (int64_t x = 0; x < n; ++x) {
        const double px = x + 0.5, py = y + 0.5;
        bool hit;
        if (ellipse) {
          const double dx = px - cx, dy = py - cy;
          const double u = (cr * dx + sr * dy) / rx, v = (-sr * dx + cr * dy) / ry;
          hit = u * u + v * v <= 1.0;
        } else {
          hit = inside_polygon(poly, px, py);
        }
        if (!hit) continue;
        for (int ch = 0; ch < 3; ++ch) out.albedo.at(ch, y, x) = color[ch];
        out.labels[static_cast<size_t>(y * n + x)] = s + 1;
      }
    }
  }
  return out;
}

// Smooth positive field in [kShadeLo, kShadeHi] with a mild per-channel tint.
Planes paint_shade(Rng& rng, const SceneSpec& spec) {
  const auto n = spec.size;
  constexpr int kWaves = 4;
  double fx[kWaves], fy[kWaves], phase[kWaves], amp[kWaves];
  for (int k = 0; k < kWaves; ++k) {
    fx[k] = uniform(rng, -spec.shade_smoothness, spec.shade_smoothness);
    fy[k] = uniform(rng, -spec.shade_smoothness, spec.shade_smoothness);
    phase[k] = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    amp[k] = uniform(rng, 0.2, 1.0);
  }
  std::vector<double> field(static_cast<size_t>(n * n));
  for (int64_t y = 0; y < n; ++y) {
    for (int64_t x = 0; x < n; ++x) {
      double f = 0;
      for (int k = 0; k < kWaves; ++k) {
        f += amp[k] * std::cos(2.0 * std::numbers::pi * (fx[k] * x + fy[k] * y) / n + phase[k]);
      }
      field[static_cast<size_t>(y * n + x)] = f;
    }
  }
  const auto [mn, mx] = std::minmax_element(field.begin(), field.end());
  const double lo = *mn, span = std::max(*mx - *mn, 1e-9);
  double tint[3];
  for (auto& t : tint) t = uniform(rng, 0.92, 1.0);
  Planes shade(3, n, n);
  for (int64_t y = 0; y < n; ++y) {
    for (int64_t x = 0; x < n; ++x) {
      const double s = kShadeLo + (kShadeHi - kShadeLo) * (field[static_cast<size_t>(y * n + x)] - lo) / span;
      for (int ch = 0; ch < 3; ++ch) shade.at(ch, y, x) = static_cast<float>(s * tint[ch]);
    }
  }
  return shade;
}

// Multiplies shade by `attenuation` inside random shadow polygons; returns the mask.
std::vector<float> cast_shadows(Rng& rng, Planes& shade, int64_t count, double attenuation) {
  const auto n = shade.h;
  std::vector<float> mask(static_cast<size_t>(n * n), 0.f);
  for (int64_t s = 0; s < count; ++s) {
    const auto poly = random_polygon(rng, static_cast<double>(n), 0.15, 0.3, 3, 5);
    for (int64_t y = 0; y < n; ++y)
      for (int64_t x = 0; x < n; ++x)
        if (inside_polygon(poly, x + 0.5, y + 0.5)) mask[static_cast<size_t>(y * n + x)] = 1.f;
  }
  for (int64_t y = 0; y < n; ++y)
    for (int64_t x = 0; x < n; ++x)
      if (mask[static_cast<size_t>(y * n + x)] > 0.f)
        for (int ch = 0; ch < 3; ++ch) shade.at(ch, y, x) *= static_cast<float>(attenuation);
  return mask;
}

double gray_at(const Planes& p, int64_t y, int64_t x) {
  return kGrayR * p.at(0, y, x) + kGrayG * p.at(1, y, x) + kGrayB * p.at(2, y, x);
}

std::string numbered(const char* prefix, int64_t i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04lld", prefix, static_cast<long long>(i));
  return buf;
}

}  // namespace

void SceneSpec::validate() const {
  require(size >= 4 && size % 4 == 0, "SceneSpec: size must be a positive multiple of 4");
  require(n_shapes.lo >= 0 && n_shapes.lo <= n_shapes.hi, "SceneSpec: n_shapes range");
  require(shadow_count.lo >= 0 && shadow_count.lo <= shadow_count.hi, "SceneSpec: shadow_count range");
  require(shadow_attenuation.lo > 0.0 && shadow_attenuation.lo <= shadow_attenuation.hi &&
              shadow_attenuation.hi <= 1.0,
          "SceneSpec: shadow_attenuation range must lie in (0,1]");
  require(shade_smoothness > 0.0, "SceneSpec: shade_smoothness must be > 0");
  require(lidar_coverage.lo > 0.0 && lidar_coverage.lo <= lidar_coverage.hi && lidar_coverage.hi <= 1.0,
          "SceneSpec: lidar_coverage range must lie in (0,1]");
  require(lidar_noise_sigma >= 0.0, "SceneSpec: lidar_noise_sigma must be >= 0");
  require(lidar_gamma.lo > 0.0 && lidar_gamma.lo <= lidar_gamma.hi, "SceneSpec: lidar_gamma range");
}

GeneratedScene generate_scene_with_info(const SceneSpec& spec, const std::string& sample_id) {
  spec.validate();
  Rng rng(spec.seed);
  const auto n = spec.size;

  auto layout = paint_albedo(rng, spec);
  auto shade = paint_shade(rng, spec);
  const double attenuation = uniform(rng, spec.shadow_attenuation.lo, spec.shadow_attenuation.hi);
  const auto shadow_count = uniform_int(rng, spec.shadow_count.lo, spec.shadow_count.hi);
  const auto shadow_mask = cast_shadows(rng, shade, shadow_count, attenuation);

  Planes image(3, n, n);
  for (size_t i = 0; i < image.v.size(); ++i) {
    image.v[i] = std::clamp(layout.albedo.v[i] * shade.v[i], 0.f, 1.f);
  }

  // Scanline sparsity: a random subset of rows is measured.
  const double gamma = uniform(rng, spec.lidar_gamma.lo, spec.lidar_gamma.hi);
  const double target = uniform(rng, spec.lidar_coverage.lo, spec.lidar_coverage.hi);
  const auto min_rows = static_cast<int64_t>(std::ceil(spec.lidar_coverage.lo * n));
  const auto max_rows = std::max(min_rows, static_cast<int64_t>(std::floor(spec.lidar_coverage.hi * n)));
  const auto rows = std::clamp<int64_t>(std::llround(target * n), std::max<int64_t>(1, min_rows), max_rows);
  std::vector<int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Planes mask(1, n, n), intensity(1, n, n);
  std::normal_distribution<double> noise(0.0, std::max(spec.lidar_noise_sigma, 0.0));
  for (int64_t r = 0; r < rows; ++r) {
    const auto y = order[static_cast<size_t>(r)];
    for (int64_t x = 0; x < n; ++x) {
      mask.at(0, y, x) = 1.f;
      double v = std::pow(gray_at(layout.albedo, y, x), gamma);
      if (spec.lidar_noise_sigma > 0.0) v += noise(rng);
      intensity.at(0, y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }

  GeneratedScene out;
  auto& s = out.sample;
  s.sample_id = sample_id;
  s.image = FeatureMap(image.tensor(), ValueRange::Unit);
  s.lidar = LidarMap::make(intensity.tensor(), mask.tensor());
  s.gt_albedo = FeatureMap(layout.albedo.tensor(), ValueRange::Unit);
  s.gt_shade = FeatureMap(shade.tensor(), ValueRange::Unit);
  s.gt_shadow_mask =
      torch::from_blob(const_cast<float*>(shadow_mask.data()), {1, n, n}, torch::kFloat32).clone();
  out.info.shadow_attenuation = attenuation;
  out.info.lidar_gamma = gamma;
  out.info.lidar_coverage = static_cast<double>(rows) / static_cast<double>(n);
  out.info.region_labels =
      torch::from_blob(layout.labels.data(), {n, n}, torch::kInt64).clone();
  return out;
}

PairedSample generate_scene(const SceneSpec& spec) {
  return generate_scene_with_info(spec, "scene_seed_" + std::to_string(spec.seed)).sample;
}

std::vector<GeneratedScene> generate_scenes(const SceneSpec& spec, int64_t n, uint64_t base_seed) {
  std::vector<GeneratedScene> out;
  out.reserve(static_cast<size_t>(std::max<int64_t>(n, 0)));
  for (int64_t i = 0; i < n; ++i) {
    auto s = spec;
    s.seed = derive_seed(base_seed, static_cast<uint64_t>(i));
    out.push_back(generate_scene_with_info(s, numbered("scene", i)));
  }
  return out;
}

// ---------------------------------------------------------------------------

JudgmentLabel relation_from_gray(double gray_a, double gray_b, double delta) {
  constexpr double tiny = 1e-10;
  const double a = std::max(gray_a, tiny);
  const double b = std::max(gray_b, tiny);
  if (b / a > delta) return JudgmentLabel::ADarker;
  if (a / b > delta) return JudgmentLabel::BDarker;
  return JudgmentLabel::Equal;
}

std::string label_name(JudgmentLabel l) {
  switch (l) {
    case JudgmentLabel::ADarker: return "a_darker";
    case JudgmentLabel::BDarker: return "b_darker";
    case JudgmentLabel::Equal: return "equal";
  }
  return "equal";
}

JudgmentLabel label_from_name(const std::string& s) {
  if (s == "a_darker") return JudgmentLabel::ADarker;
  if (s == "b_darker") return JudgmentLabel::BDarker;
  if (s == "equal") return JudgmentLabel::Equal;
  throw LoadError("unknown judgment label '" + s + "'");
}

JudgmentSet generate_annotations(const PairedSample& sample, int64_t n_pairs, double delta,
                                 double equal_band, uint64_t seed) {
  require(n_pairs > 0, "generate_annotations: n_pairs must be > 0");
  require(sample.gt_albedo.has_value(), "generate_annotations: sample has no ground-truth albedo");
  require(delta >= 1.0 && equal_band >= 0.0, "generate_annotations: need delta >= 1 and equal_band >= 0");
  const auto gray = to_grayscale(sample.gt_albedo->tensor()).to(torch::kFloat64).contiguous();
  const auto acc = gray.accessor<double, 3>();
  const auto h = gray.size(1), w = gray.size(2);

  Rng rng(seed);
  std::uniform_real_distribution<double> weight(0.5, 2.0);
  const double log_delta = std::log(delta);
  const double half_band = std::log1p(equal_band);
  JudgmentSet out;
  const int64_t max_attempts = 200 * n_pairs;
  for (int64_t attempt = 0; attempt < max_attempts && static_cast<int64_t>(out.size()) < n_pairs; ++attempt) {
    Judgment j;
    j.ya = uniform_int(rng, 0, h - 1);
    j.xa = uniform_int(rng, 0, w - 1);
    if (uniform(rng, 0.0, 1.0) < kLocalPairFraction) {
      j.yb = std::clamp(j.ya + uniform_int(rng, -kLocalPairRadius, kLocalPairRadius), int64_t{0}, h - 1);
      j.xb = std::clamp(j.xa + uniform_int(rng, -kLocalPairRadius, kLocalPairRadius), int64_t{0}, w - 1);
    } else {
      j.yb = uniform_int(rng, 0, h - 1);
      j.xb = uniform_int(rng, 0, w - 1);
    }
    if (j.ya == j.yb && j.xa == j.xb) continue;
    const double ga = std::max(acc[0][j.ya][j.xa], 1e-10);
    const double gb = std::max(acc[0][j.yb][j.xb], 1e-10);
    const double log_ratio = std::abs(std::log(gb / ga));
    if (equal_band > 0.0 && std::abs(log_ratio - log_delta) < half_band) continue;
    j.label = relation_from_gray(ga, gb, delta);
    j.weight = weight(rng);
    out.push_back(j);
  }
  return out;
}

// ---------------------------------------------------------------------------

DomainPool generate_domain_pool(PoolKind kind, int64_t n, uint64_t seed, const SceneSpec& spec) {
  require(n >= 1, "generate_domain_pool: n must be >= 1");
  spec.validate();
  DomainPool pool;
  pool.kind = kind;
  const uint64_t stream_base = kind == PoolKind::Albedo ? 0x41000000ull : 0x53000000ull;
  for (int64_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, stream_base + static_cast<uint64_t>(i)));
    if (kind == PoolKind::Albedo) {
      auto layout = paint_albedo(rng, spec);
      pool.ids.push_back(numbered("albedo", i));
      pool.maps.emplace_back(layout.albedo.tensor(), ValueRange::Unit);
    } else {
      auto shade = paint_shade(rng, spec);
      if (uniform(rng, 0.0, 1.0) < 0.5) {
        const double att = uniform(rng, spec.shadow_attenuation.lo, spec.shadow_attenuation.hi);
        cast_shadows(rng, shade, uniform_int(rng, 1, 2), att);
      }
      pool.ids.push_back(numbered("shade", i));
      pool.maps.emplace_back(shade.tensor(), ValueRange::Unit);
    }
  }
  return pool;
}

}  // namespace liet
