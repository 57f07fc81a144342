// Copyright 2026 The liet Authors
// SPDX-License-Identifier: Apache-2.0

#include "liet/run_config.hpp"

#include <fstream>
#include <sstream>

#include "config_json.hpp"

namespace liet {

using detail::json;

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": invalid JSON (" + e.what() + ")");
  }
  RunConfig cfg;
  detail::ObjectReader r(root, "");
  detail::read_into(r.object("net"), "net", cfg.net);
  detail::read_into(r.object("train"), "train", cfg.train);
  {
    const auto& d = r.object("data");
    detail::ObjectReader dr(d, "data");
    detail::read_into(dr.object("scene"), "data.scene", cfg.data.scene);
    dr.field<int64_t>("n_samples", cfg.data.n_samples, [](const int64_t& v) { return v > 0; }, "must be > 0");
    dr.field<int64_t>("n_pairs", cfg.data.n_pairs, [](const int64_t& v) { return v > 0; }, "must be > 0");
    dr.field<double>("delta", cfg.data.delta, [](const double& v) { return v >= 1.0; }, "must be >= 1");
    dr.field<double>("equal_band", cfg.data.equal_band, [](const double& v) { return v >= 0.0; }, "must be >= 0");
    dr.field<std::string>("dir", cfg.data.dir);
    dr.finish();
  }
  detail::read_into(r.object("eval"), "eval", cfg.eval);
  r.finish();
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

std::string to_json_text(const RunConfig& cfg) {
  json root;
  root["net"] = detail::to_json(cfg.net);
  root["train"] = detail::to_json(cfg.train);
  root["data"] = {{"scene", detail::to_json(cfg.data.scene)},
                  {"n_samples", cfg.data.n_samples},
                  {"n_pairs", cfg.data.n_pairs},
                  {"delta", cfg.data.delta},
                  {"equal_band", cfg.data.equal_band},
                  {"dir", cfg.data.dir}};
  root["eval"] = detail::to_json(cfg.eval);
  return root.dump(2);
}

std::filesystem::path write_resolved_config(const RunConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto path = dir / kResolvedConfigName;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << to_json_text(cfg) << "\n";
  return path;
}

}  // namespace liet
