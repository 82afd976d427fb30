#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "switchq/limit_laws.hpp"
#include "switchq/matrix.hpp"
#include "switchq/power_series.hpp"
#include "switchq/state_space.hpp"
#include "switchq/transform_engine.hpp"

namespace switchq {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parsed, validated experiment description. The raw JSON is kept so the run
// manifest can echo exactly what was resolved.
struct ExperimentConfig {
  nlohmann::json raw;

  ModelSpec model;
  std::optional<RationalTail> alpha_pq;

  bool has_scaling = false;
  ScalingSpec scaling;
  std::vector<long long> n_ladder;

  std::vector<std::vector<double>> s_vectors;
  std::vector<double> t_values;  // either an explicit list or an expanded grid
  bool t_is_uniform_grid = false;

  int rk4_steps = kDefaultRk4Steps;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  int series_truncation = kDefaultSeriesTruncation;
  SeriesMode series_mode = SeriesMode::derived;

  bool mc_enabled = false;

  std::string out_dir = "out";
  bool write_csv = true;
  bool write_json = false;
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& field, const std::string& why) {
  throw ConfigError("config error at " + field + ": " + why);
}

template <typename T>
T get_required(const nlohmann::json& j, const std::string& parent, const char* key) {
  if (!j.contains(key)) config_fail(parent + "." + key, "missing required field");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    config_fail(parent + "." + key, e.what());
  }
}

template <typename T>
T get_optional(const nlohmann::json& j, const std::string& parent, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    config_fail(parent + "." + key, e.what());
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using detail::config_fail;
  using detail::get_optional;
  using detail::get_required;

  ExperimentConfig cfg;
  cfg.raw = j;

  if (!j.contains("model")) config_fail("model", "missing required section");
  const auto& jm = j.at("model");
  const int k = get_required<int>(jm, "model", "k");
  const int K = get_required<int>(jm, "model", "K");
  const double lambda = get_required<double>(jm, "model", "lambda");
  const auto rows = get_required<std::vector<std::vector<double>>>(jm, "model", "P");

  double alpha = 0.0;
  if (jm.contains("alpha_pq")) {
    const auto pq = get_required<std::vector<long long>>(jm, "model", "alpha_pq");
    if (pq.size() != 2) config_fail("model.alpha_pq", "expected [p, q]");
    try {
      cfg.alpha_pq = RationalTail::make(pq[0], pq[1]);
    } catch (const std::exception& e) {
      config_fail("model.alpha_pq", e.what());
    }
    alpha = cfg.alpha_pq->alpha();
    if (jm.contains("alpha") && std::fabs(jm.at("alpha").get<double>() - alpha) > 1e-12)
      config_fail("model.alpha", "conflicts with alpha_pq");
  } else {
    alpha = get_required<double>(jm, "model", "alpha");
  }

  Matrix p(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) config_fail("model.P", "ragged rows");
    for (std::size_t c = 0; c < rows[i].size(); ++c) p(i, c) = rows[i][c];
  }
  const bool unichain = get_optional<bool>(jm, "model", "unichain", false);
  try {
    cfg.model = unichain ? ModelSpec::make_unichain(k, K, lambda, std::move(p), alpha)
                         : ModelSpec::make(k, K, lambda, std::move(p), alpha);
  } catch (const std::exception& e) {
    config_fail("model", e.what());
  }

  if (j.contains("scaling")) {
    const auto& js = j.at("scaling");
    const double gamma = get_required<double>(js, "scaling", "gamma");
    const long long n = get_optional<long long>(js, "scaling", "n", 1);
    try {
      cfg.scaling = ScalingSpec(n, gamma);
    } catch (const std::exception& e) {
      config_fail("scaling", e.what());
    }
    cfg.has_scaling = true;
    cfg.n_ladder = get_optional<std::vector<long long>>(js, "scaling", "n_ladder", {});
    for (std::size_t i = 0; i + 1 < cfg.n_ladder.size(); ++i)
      if (cfg.n_ladder[i] >= cfg.n_ladder[i + 1])
        config_fail("scaling.n_ladder", "must be strictly increasing");
    for (long long v : cfg.n_ladder)
      if (v < 1) config_fail("scaling.n_ladder", "entries must be >= 1");
  }

  if (!j.contains("probe")) config_fail("probe", "missing required section");
  const auto& jp = j.at("probe");
  cfg.s_vectors = get_required<std::vector<std::vector<double>>>(jp, "probe", "s");
  if (cfg.s_vectors.empty()) config_fail("probe.s", "need at least one s vector");
  for (std::size_t i = 0; i < cfg.s_vectors.size(); ++i) {
    const auto& s = cfg.s_vectors[i];
    if (s.size() != static_cast<std::size_t>(cfg.model.k))
      config_fail("probe.s[" + std::to_string(i) + "]",
                  "expected " + std::to_string(cfg.model.k) + " components");
    for (double v : s)
      if (v > 0.0) config_fail("probe.s[" + std::to_string(i) + "]", "components must be <= 0");
  }
  if (jp.contains("t_grid") == jp.contains("t"))
    config_fail("probe", "provide exactly one of t_grid or t");
  if (jp.contains("t_grid")) {
    const auto& jg = jp.at("t_grid");
    const double start = get_optional<double>(jg, "probe.t_grid", "start", 0.0);
    const double stop = get_required<double>(jg, "probe.t_grid", "stop");
    const int points = get_required<int>(jg, "probe.t_grid", "points");
    if (start != 0.0) config_fail("probe.t_grid.start", "uniform grids must start at 0");
    if (!(stop > 0.0 && stop <= 1.0)) config_fail("probe.t_grid.stop", "must lie in (0,1]");
    if (points < 2) config_fail("probe.t_grid.points", "need at least 2 points");
    for (int i = 0; i < points; ++i)
      cfg.t_values.push_back(stop * i / static_cast<double>(points - 1));
    cfg.t_is_uniform_grid = true;
  } else {
    cfg.t_values = get_required<std::vector<double>>(jp, "probe", "t");
    if (cfg.t_values.empty()) config_fail("probe.t", "need at least one time");
    for (double t : cfg.t_values)
      if (!(t >= 0.0 && t <= 1.0)) config_fail("probe.t", "times must lie in [0,1]");
  }

  if (j.contains("engine")) {
    const auto& je = j.at("engine");
    cfg.rk4_steps = get_optional<int>(je, "engine", "rk4_steps", kDefaultRk4Steps);
    if (cfg.rk4_steps < 1) config_fail("engine.rk4_steps", "must be >= 1");
    cfg.trials = get_optional<std::uint64_t>(je, "engine", "trials", 100000);
    if (cfg.trials < 1) config_fail("engine.trials", "must be >= 1");
    cfg.seed = get_optional<std::uint64_t>(je, "engine", "seed", 1);
    cfg.series_truncation =
        get_optional<int>(je, "engine", "series_truncation", kDefaultSeriesTruncation);
    const std::string mode = get_optional<std::string>(je, "engine", "series_mode", "derived");
    if (mode == "derived")
      cfg.series_mode = SeriesMode::derived;
    else if (mode == "paper-printed")
      cfg.series_mode = SeriesMode::paper_printed;
    else
      config_fail("engine.series_mode", "expected derived or paper-printed");
  }

  if (j.contains("mc")) cfg.mc_enabled = detail::get_optional<bool>(j.at("mc"), "mc", "enabled", false);

  if (j.contains("output")) {
    const auto& jo = j.at("output");
    cfg.out_dir = get_optional<std::string>(jo, "output", "dir", "out");
    const auto formats =
        get_optional<std::vector<std::string>>(jo, "output", "formats", {"csv"});
    cfg.write_csv = cfg.write_json = false;
    for (const auto& f : formats) {
      if (f == "csv")
        cfg.write_csv = true;
      else if (f == "json")
        cfg.write_json = true;
      else
        config_fail("output.formats", "unknown format '" + f + "' (expected csv or json)");
    }
    if (!cfg.write_csv && !cfg.write_json) config_fail("output.formats", "need at least one");
  }

  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace switchq
