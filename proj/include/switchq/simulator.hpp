#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "switchq/distributions.hpp"
#include "switchq/limit_laws.hpp"
#include "switchq/matrix.hpp"
#include "switchq/mc_estimator.hpp"
#include "switchq/rng.hpp"
#include "switchq/state_space.hpp"
#include "switchq/transform_engine.hpp"

namespace switchq {

// One realization of the rescaled prelimit process on [0, t]: arrivals of a
// Poisson(lambda n^gamma) process, batch states driven by P_n, service times
// L/n shared per (arrival, queue).
struct PathSample {
  double t = 0.0;
  std::size_t initial_state = 0;
  std::vector<double> arrival_epochs;
  std::vector<std::size_t> batch_states;       // chain state at each arrival
  std::vector<std::vector<double>> services;   // services[i][j] = L_ij / n
  std::vector<long> terminal_queue;            // Z(t)
  std::size_t terminal_chain_state = 0;        // X_{N_t}

  // Recomputes Z from the stored fields.
  std::vector<long> reconstruct_queue(const StateSpace& space) const {
    std::vector<long> z(space.k(), 0);
    for (std::size_t i = 0; i < arrival_epochs.size(); ++i) {
      const auto& batch = space.state(batch_states[i]);
      for (int j = 0; j < space.k(); ++j)
        if (arrival_epochs[i] <= t && t < arrival_epochs[i] + services[i][j]) z[j] += batch[j];
    }
    return z;
  }
};

inline PathSample simulate_path(const ModelSpec& model, const ScalingSpec& scaling, double t,
                                std::size_t x0, Rng& rng) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("simulate_path: t must lie in [0,1]");
  if (x0 >= model.space.size()) throw std::invalid_argument("simulate_path: x0 out of range");
  const double rate = model.lambda * std::pow(static_cast<double>(scaling.n), scaling.gamma);
  const Matrix pn = scaled_transition(model.P, scaling.n, scaling.gamma);
  const ParetoService service(model.alpha);
  const double inv_n = 1.0 / static_cast<double>(scaling.n);

  PathSample path;
  path.t = t;
  path.initial_state = x0;
  const std::uint64_t arrivals = rng.poisson(rate * t);
  path.arrival_epochs = rng.sorted_uniforms(arrivals, 0.0, t);
  path.batch_states.reserve(arrivals);
  path.services.reserve(arrivals);
  path.terminal_queue.assign(model.k, 0);

  const std::size_t m = model.space.size();
  std::vector<double> row(m);
  std::size_t x = x0;
  for (std::uint64_t i = 0; i < arrivals; ++i) {
    for (std::size_t y = 0; y < m; ++y) row[y] = pn(x, y);
    x = rng.sample_row(row);
    path.batch_states.push_back(x);
    const auto& batch = model.space.state(x);
    std::vector<double> svc(model.k);
    for (int j = 0; j < model.k; ++j) {
      svc[j] = service.sample(rng) * inv_n;
      if (path.arrival_epochs[i] + svc[j] > t) path.terminal_queue[j] += batch[j];
    }
    path.services.push_back(std::move(svc));
  }
  path.terminal_chain_state = x;
  return path;
}

// Empirical joint transform with per-entry standard errors.
struct EmpiricalTransform {
  Matrix estimate;
  Matrix std_error;
  std::uint64_t trials = 0;
  std::vector<double> s;
  double t = 0.0;
  ScalingSpec scaling;
};

// Row x0 is the mean over trials of exp(<s*, Z(t)>) 1[X_{N_t} = y] for paths
// started in x0. With rescale_s the argument becomes s / n^(gamma - alpha)
// (the fast-regime normalization, applied to s rather than to Z).
inline EmpiricalTransform empirical_transform(const ModelSpec& model, const ScalingSpec& scaling,
                                              std::span<const double> s, double t,
                                              std::uint64_t trials, std::uint64_t seed,
                                              bool rescale_s = false, int workers = 0) {
  detail::check_nonpositive(s, model.k);
  std::vector<double> sv(s.begin(), s.end());
  if (rescale_s) {
    if (!(scaling.gamma > model.alpha))
      throw std::invalid_argument("empirical_transform: rescale_s requires gamma > alpha");
    const double norm = std::pow(static_cast<double>(scaling.n), scaling.gamma - model.alpha);
    for (auto& v : sv) v /= norm;
  }
  const std::size_t m = model.space.size();
  McTransform mc = detail::mc_matrix_estimate(
      m, m, trials, seed, workers, [&model, &scaling, sv, t](std::size_t row, Rng& rng) {
        const PathSample path = simulate_path(model, scaling, t, row, rng);
        double exponent = 0.0;
        for (int j = 0; j < model.k; ++j) exponent += sv[j] * path.terminal_queue[j];
        return detail::PathOutcome{path.terminal_chain_state, std::exp(exponent)};
      });
  EmpiricalTransform out;
  out.estimate = std::move(mc.estimate);
  out.std_error = std::move(mc.std_error);
  out.trials = trials;
  out.s.assign(s.begin(), s.end());
  out.t = t;
  out.scaling = scaling;
  return out;
}

// One row of the convergence table produced by regime_sweep.
struct SweepRow {
  LimitRegime regime;
  long long n = 1;
  double t = 0.0;
  double sup_distance = 0.0;
  std::string method;  // "ode" or "mc"
};

// For each n in the ladder: distance (max absolute entry difference) between
// the prelimit transform and the regime's limit transform at time t. The
// prelimit is integrated in the time-changed variable (solve_chi_n) and read
// off at u = t^(1/beta); the fast regime rescales the argument.
inline std::vector<SweepRow> regime_sweep(const ModelSpec& model, double gamma,
                                          std::span<const double> s, double t,
                                          std::span<const long long> n_ladder,
                                          std::uint64_t mc_trials = 0, std::uint64_t seed = 0,
                                          int steps = kDefaultRk4Steps, int workers = 0) {
  detail::check_nonpositive(s, model.k);
  if (n_ladder.empty()) throw std::invalid_argument("regime_sweep: n_ladder must be nonempty");
  for (std::size_t i = 0; i + 1 < n_ladder.size(); ++i)
    if (!(n_ladder[i] < n_ladder[i + 1]))
      throw std::invalid_argument("regime_sweep: n_ladder must be increasing");

  const LimitRegime regime = classify_regime(gamma, model.alpha);
  Matrix limit;
  switch (regime) {
    case LimitRegime::slow:
      limit = slow_limit_lt(model, t).values;
      break;
    case LimitRegime::equilibrium:
      limit = equilibrium_limit_lt(model, s, t, steps).values;
      break;
    case LimitRegime::fast:
      limit = fast_limit_lt(model, s, t, steps).values;
      break;
  }

  const double u_end = std::pow(t, 1.0 / model.beta);
  std::vector<SweepRow> rows;
  for (long long n : n_ladder) {
    const ScalingSpec scaling(n, gamma);
    const ChiRegime chi_regime =
        regime == LimitRegime::fast ? ChiRegime::fast : ChiRegime::slow_or_equilibrium;
    const Matrix prelimit = solve_chi_n(model, scaling, s, chi_regime, u_end, steps).at_end();
    rows.push_back({regime, n, t, max_abs_diff(prelimit, limit), "ode"});
    if (mc_trials > 0) {
      const EmpiricalTransform emp = empirical_transform(
          model, scaling, s, t, mc_trials, seed, regime == LimitRegime::fast, workers);
      rows.push_back({regime, n, t, max_abs_diff(emp.estimate, limit), "mc"});
    }
  }
  return rows;
}

}  // namespace switchq
