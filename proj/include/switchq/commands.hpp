#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "switchq/config.hpp"
#include "switchq/csv.hpp"
#include "switchq/limit_laws.hpp"
#include "switchq/power_series.hpp"
#include "switchq/simulator.hpp"
#include "switchq/transform_engine.hpp"
#include "switchq/verify.hpp"
#include "switchq/version.hpp"

namespace switchq {

// Command-line overrides applied on top of the config file.
struct CliOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<int> steps;
  std::optional<std::string> format;
};

inline void apply_overrides(ExperimentConfig& cfg, const CliOverrides& ov) {
  if (ov.out_dir) cfg.out_dir = *ov.out_dir;
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.trials) cfg.trials = *ov.trials;
  if (ov.steps) cfg.rk4_steps = *ov.steps;
  if (ov.format) {
    cfg.write_csv = *ov.format == "csv";
    cfg.write_json = *ov.format == "json";
    if (!cfg.write_csv && !cfg.write_json)
      throw ConfigError("unknown --format '" + *ov.format + "' (expected csv or json)");
  }
  cfg.raw["resolved"] = {{"out_dir", cfg.out_dir},
                         {"seed", cfg.seed},
                         {"trials", cfg.trials},
                         {"rk4_steps", cfg.rk4_steps},
                         {"formats", std::vector<std::string>{} }};
  auto& formats = cfg.raw["resolved"]["formats"];
  if (cfg.write_csv) formats.push_back("csv");
  if (cfg.write_json) formats.push_back("json");
}

namespace detail {

// Rows of (s_id, t, x, y, value...) shared by the table-producing commands.
struct TransformCell {
  int s_id;
  double t;
  std::size_t x;
  std::size_t y;
  std::vector<double> values;
};

struct CommandOutput {
  std::vector<std::string> files;
};

inline void write_manifest(const std::string& dir, const std::string& command,
                           const ExperimentConfig& cfg, double wall_seconds,
                           std::vector<std::string>& files,
                           const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json manifest;
  manifest["command"] = command;
  manifest["config"] = cfg.raw;
  manifest["seed"] = cfg.seed;
  manifest["versions"] = {{"switchq", kVersion}};
  manifest["wall_seconds"] = wall_seconds;
  manifest["outputs"] = files;
  for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();
  const std::string path = dir + "/" + command + "_manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << manifest.dump(2) << "\n";
  files.push_back(path);
}

inline void write_table(const ExperimentConfig& cfg, const std::string& command,
                        const std::vector<std::string>& value_columns,
                        const std::vector<TransformCell>& cells,
                        std::vector<std::string>& files) {
  const StateSpace& space = cfg.model.space;
  if (cfg.write_csv) {
    std::vector<std::string> header{"s_id", "t", "x", "y", "x_state", "y_state"};
    header.insert(header.end(), value_columns.begin(), value_columns.end());
    CsvWriter csv(cfg.out_dir + "/" + command + ".csv", header);
    for (const auto& c : cells) {
      auto row = csv.row();
      row.cell(c.s_id).cell(c.t).cell(c.x).cell(c.y).cell(space.label(c.x)).cell(space.label(c.y));
      for (double v : c.values) row.cell(v);
    }
    files.push_back(csv.path());
  }
  if (cfg.write_json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : cells) {
      nlohmann::json row{{"s_id", c.s_id}, {"t", c.t},       {"x", c.x},
                         {"y", c.y},       {"x_state", space.label(c.x)},
                         {"y_state", space.label(c.y)}};
      for (std::size_t i = 0; i < value_columns.size(); ++i) row[value_columns[i]] = c.values[i];
      rows.push_back(std::move(row));
    }
    const std::string path = cfg.out_dir + "/" + command + ".json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << rows.dump(2) << "\n";
    files.push_back(path);
  }
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Aligns the step count so every probe time of a uniform grid from 0 lands
// exactly on an ODE grid node.
inline int aligned_steps(int requested, std::size_t probe_points) {
  const int segments = static_cast<int>(probe_points) - 1;
  const int per_segment = std::max(1, (requested + segments - 1) / segments);
  return per_segment * segments;
}

}  // namespace detail

// solve: transform of the (optionally rescaled) prelimit process over the
// probe grid.
inline std::vector<std::string> cmd_solve(const ExperimentConfig& cfg) {
  detail::Stopwatch watch;
  std::filesystem::create_directories(cfg.out_dir);
  std::vector<detail::TransformCell> cells;
  const std::size_t m = cfg.model.space.size();
  for (int s_id = 0; s_id < static_cast<int>(cfg.s_vectors.size()); ++s_id) {
    const auto& s = cfg.s_vectors[s_id];
    auto solve_to = [&](double t_max, int steps) {
      return cfg.has_scaling ? solve_psi_n(cfg.model, cfg.scaling, s, t_max, steps)
                             : solve_psi(cfg.model, s, t_max, steps);
    };
    auto emit = [&](double t, const Matrix& value) {
      for (std::size_t x = 0; x < m; ++x)
        for (std::size_t y = 0; y < m; ++y) cells.push_back({s_id, t, x, y, {value(x, y)}});
    };
    if (cfg.t_is_uniform_grid) {
      const int steps = detail::aligned_steps(cfg.rk4_steps, cfg.t_values.size());
      const OdeGrid grid = solve_to(cfg.t_values.back(), steps);
      const int stride = steps / (static_cast<int>(cfg.t_values.size()) - 1);
      for (std::size_t i = 0; i < cfg.t_values.size(); ++i)
        emit(cfg.t_values[i], grid.values[i * stride]);
    } else {
      for (double t : cfg.t_values) {
        if (t == 0.0)
          emit(t, Matrix::identity(m));
        else
          emit(t, solve_to(t, cfg.rk4_steps).at_end());
      }
    }
  }
  std::vector<std::string> files;
  detail::write_table(cfg, "solve", {"value"}, cells, files);
  detail::write_manifest(cfg.out_dir, "solve", cfg, watch.seconds(), files);
  return files;
}

// limit: classifies the regime and emits the limit transform, optionally with
// Monte Carlo cross-check columns.
inline std::vector<std::string> cmd_limit(const ExperimentConfig& cfg) {
  detail::Stopwatch watch;
  std::filesystem::create_directories(cfg.out_dir);
  if (!cfg.has_scaling) throw ConfigError("limit requires a scaling section (gamma)");
  const LimitRegime regime = classify_regime(cfg.scaling.gamma, cfg.model.alpha);
  const std::size_t m = cfg.model.space.size();
  std::vector<detail::TransformCell> cells;
  std::vector<std::string> columns{"regime_id", "ode"};
  // The slow limit is degenerate at 0, so there is nothing to estimate.
  const bool mc = cfg.mc_enabled && regime != LimitRegime::slow;
  if (mc) {
    columns.push_back("mc");
    columns.push_back("mc_stderr");
    columns.push_back("within_4se");
  }
  for (int s_id = 0; s_id < static_cast<int>(cfg.s_vectors.size()); ++s_id) {
    const auto& s = cfg.s_vectors[s_id];
    for (double t : cfg.t_values) {
      Matrix ode;
      switch (regime) {
        case LimitRegime::slow:
          ode = slow_limit_lt(cfg.model, t).values;
          break;
        case LimitRegime::equilibrium:
          ode = equilibrium_limit_lt(cfg.model, s, t, cfg.rk4_steps).values;
          break;
        case LimitRegime::fast:
          ode = fast_limit_lt(cfg.model, s, t, cfg.rk4_steps).values;
          break;
      }
      std::optional<McTransform> est;
      if (mc && regime == LimitRegime::fast)
        est = fast_limit_mc(cfg.model, s, t, cfg.trials, cfg.seed);
      else if (mc && regime == LimitRegime::equilibrium)
        est = equilibrium_limit_mc(cfg.model, s, t, cfg.trials, cfg.seed);
      for (std::size_t x = 0; x < m; ++x)
        for (std::size_t y = 0; y < m; ++y) {
          detail::TransformCell cell{s_id, t, x, y, {}};
          cell.values.push_back(static_cast<double>(regime));
          cell.values.push_back(ode(x, y));
          if (est) {
            const double diff = std::fabs(est->estimate(x, y) - ode(x, y));
            cell.values.push_back(est->estimate(x, y));
            cell.values.push_back(est->std_error(x, y));
            cell.values.push_back(
                (diff == 0.0 || diff <= 4.0 * est->std_error(x, y)) ? 1.0 : 0.0);
          }
          cells.push_back(std::move(cell));
        }
    }
  }
  std::vector<std::string> files;
  detail::write_table(cfg, "limit", columns, cells, files);
  detail::write_manifest(cfg.out_dir, "limit", cfg, watch.seconds(), files,
                         {{"regime", regime_name(regime)}});
  return files;
}

// series: rational-alpha power-series route to the fast-limit transform.
inline std::vector<std::string> cmd_series(const ExperimentConfig& cfg) {
  detail::Stopwatch watch;
  std::filesystem::create_directories(cfg.out_dir);
  if (!cfg.alpha_pq)
    throw ConfigError("series requires model.alpha_pq = [p, q] (rational tail index)");
  const RationalTail tail = *cfg.alpha_pq;
  const std::size_t m = cfg.model.space.size();
  std::vector<detail::TransformCell> cells;
  for (int s_id = 0; s_id < static_cast<int>(cfg.s_vectors.size()); ++s_id) {
    const auto& s = cfg.s_vectors[s_id];
    const SeriesSolution sol =
        fast_chi_series(cfg.model, tail, s, cfg.series_truncation, cfg.series_mode);
    for (double t : cfg.t_values) {
      const SeriesValue val = evaluate_series(sol, std::pow(t, 1.0 / tail.beta()));
      for (std::size_t x = 0; x < m; ++x)
        for (std::size_t y = 0; y < m; ++y)
          cells.push_back({s_id, t, x, y, {val.value(x, y), val.truncation_indicator}});
    }
  }
  std::vector<std::string> files;
  detail::write_table(cfg, "series", {"value", "truncation_indicator"}, cells, files);
  detail::write_manifest(cfg.out_dir, "series", cfg, watch.seconds(), files,
                         {{"series_mode", series_mode_name(cfg.series_mode)}});
  return files;
}

// sweep: convergence table of prelimit-to-limit distances over the n ladder.
inline std::vector<std::string> cmd_sweep(const ExperimentConfig& cfg) {
  detail::Stopwatch watch;
  std::filesystem::create_directories(cfg.out_dir);
  if (!cfg.has_scaling || cfg.n_ladder.empty())
    throw ConfigError("sweep requires scaling.n_ladder");
  std::vector<std::pair<int, SweepRow>> table;
  for (int s_id = 0; s_id < static_cast<int>(cfg.s_vectors.size()); ++s_id)
    for (double t : cfg.t_values)
      for (const auto& row :
           regime_sweep(cfg.model, cfg.scaling.gamma, cfg.s_vectors[s_id], t, cfg.n_ladder,
                        cfg.mc_enabled ? cfg.trials : 0, cfg.seed, cfg.rk4_steps))
        table.emplace_back(s_id, row);
  std::vector<std::string> files;
  if (cfg.write_csv) {
    CsvWriter csv(cfg.out_dir + "/sweep.csv",
                  {"regime", "n", "t", "s_id", "sup_distance", "method"});
    for (const auto& [s_id, row] : table)
      csv.row()
          .cell(std::string(regime_name(row.regime)))
          .cell(row.n)
          .cell(row.t)
          .cell(s_id)
          .cell(row.sup_distance)
          .cell(row.method);
    files.push_back(csv.path());
  }
  if (cfg.write_json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [s_id, row] : table)
      rows.push_back({{"regime", regime_name(row.regime)},
                      {"n", row.n},
                      {"t", row.t},
                      {"s_id", s_id},
                      {"sup_distance", row.sup_distance},
                      {"method", row.method}});
    const std::string path = cfg.out_dir + "/sweep.json";
    std::ofstream out(path, std::ios::binary);
    out << rows.dump(2) << "\n";
    files.push_back(path);
  }
  detail::write_manifest(cfg.out_dir, "sweep", cfg, watch.seconds(), files);
  return files;
}

// simulate: empirical transform of the prelimit process with standard errors.
inline std::vector<std::string> cmd_simulate(const ExperimentConfig& cfg) {
  detail::Stopwatch watch;
  std::filesystem::create_directories(cfg.out_dir);
  if (!cfg.has_scaling) throw ConfigError("simulate requires a scaling section");
  const std::size_t m = cfg.model.space.size();
  std::vector<detail::TransformCell> cells;
  for (int s_id = 0; s_id < static_cast<int>(cfg.s_vectors.size()); ++s_id) {
    for (double t : cfg.t_values) {
      const EmpiricalTransform emp = empirical_transform(
          cfg.model, cfg.scaling, cfg.s_vectors[s_id], t, cfg.trials, cfg.seed);
      for (std::size_t x = 0; x < m; ++x)
        for (std::size_t y = 0; y < m; ++y)
          cells.push_back(
              {s_id, t, x, y, {emp.estimate(x, y), emp.std_error(x, y)}});
    }
  }
  std::vector<std::string> files;
  detail::write_table(cfg, "simulate", {"estimate", "stderr"}, cells, files);
  detail::write_manifest(cfg.out_dir, "simulate", cfg, watch.seconds(), files);
  return files;
}

// verify: runs a named acceptance suite (or all of them), printing one
// pass/fail line per criterion. Returns a process exit status.
inline int cmd_verify(const std::string& suite, std::ostream& out = std::cout) {
  std::vector<CriterionResult> results;
  if (suite == "all" || suite.empty()) {
    for (const auto& spec : acceptance_criteria())
      results.push_back(run_criterion_timed(spec));
  } else {
    results.push_back(run_acceptance_suite(suite));
  }
  bool all_passed = true;
  for (const auto& r : results) {
    out << (r.passed ? "PASS" : "FAIL") << " [" << r.number << "/" << acceptance_criteria().size()
        << "] " << r.name << ": " << r.detail << " (" << format_value(r.seconds) << "s)\n";
    all_passed = all_passed && r.passed;
  }
  return all_passed ? 0 : 1;
}

}  // namespace switchq
