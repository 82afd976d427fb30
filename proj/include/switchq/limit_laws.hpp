#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "switchq/matrix.hpp"
#include "switchq/mc_estimator.hpp"
#include "switchq/rng.hpp"
#include "switchq/state_space.hpp"
#include "switchq/transform_engine.hpp"

namespace switchq {

enum class LimitRegime { slow, equilibrium, fast };

inline const char* regime_name(LimitRegime r) {
  switch (r) {
    case LimitRegime::slow: return "slow";
    case LimitRegime::equilibrium: return "equilibrium";
    case LimitRegime::fast: return "fast";
  }
  return "?";
}

// Strict trichotomy gamma < alpha / = / >. Doubles are compared exactly; the
// rational overload below is exact for user-supplied fractions.
inline LimitRegime classify_regime(double gamma, double alpha) {
  if (!(gamma > 0.0)) throw std::invalid_argument("classify_regime: gamma must be positive");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("classify_regime: alpha must lie in (0,1)");
  if (gamma < alpha) return LimitRegime::slow;
  if (gamma > alpha) return LimitRegime::fast;
  return LimitRegime::equilibrium;
}

struct Rational {
  long long num = 0;
  long long den = 1;
};

inline LimitRegime classify_regime(const Rational& gamma, const Rational& alpha) {
  if (gamma.den <= 0 || alpha.den <= 0)
    throw std::invalid_argument("classify_regime: denominators must be positive");
  if (gamma.num <= 0) throw std::invalid_argument("classify_regime: gamma must be positive");
  const long long lhs = gamma.num * alpha.den;
  const long long rhs = alpha.num * gamma.den;
  if (lhs < rhs) return LimitRegime::slow;
  if (lhs > rhs) return LimitRegime::fast;
  return LimitRegime::equilibrium;
}

// Slow-arrival limit: the queue vanishes and only the chain survives, so the
// transform at time t is the semigroup exp(t lambda (P - I)), independent of s.
inline TransformMatrix slow_limit_lt(const ModelSpec& model, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("slow_limit_lt: t must lie in [0,1]");
  TransformMatrix out;
  out.values = expm(t * model.lambda * (model.P - Matrix::identity(model.space.size())));
  out.s.assign(model.k, 0.0);
  out.t = t;
  return out;
}

namespace detail {

inline Matrix sum_s_delta(const ModelSpec& model, std::span<const double> s) {
  std::vector<double> d(model.space.size(), 0.0);
  for (std::size_t x = 0; x < model.space.size(); ++x) {
    const auto& st = model.space.state(x);
    for (int j = 0; j < model.k; ++j) d[x] += s[j] * st[j];
  }
  return Matrix::diagonal(d);
}

}  // namespace detail

// chi(s,.) of the fast regime: chi' = [beta u^(beta-1) lambda (P - I) +
// beta lambda sum_l s_l Delta_l] chi, chi(s,0) = I.
inline OdeGrid fast_limit_chi(const ModelSpec& model, std::span<const double> s, double u_max,
                              int steps = kDefaultRk4Steps) {
  detail::check_nonpositive(s, model.k);
  const Matrix drift = model.lambda * (model.P - Matrix::identity(model.space.size()));
  const Matrix source = model.beta * model.lambda * detail::sum_s_delta(model, s);
  const double beta = model.beta;
  auto coefficient = [drift, source, beta](double u) {
    return beta * std::pow(u, beta - 1.0) * drift + source;
  };
  return solve_linear_matrix_ode(coefficient, Matrix::identity(model.space.size()), u_max, steps);
}

// Transform of (beta lambda int_{1-t^(1/beta)}^1 X^beta(v) dv, X^beta(1))
// given X^beta(1 - t^(1/beta)) = x, reported at original time t.
inline TransformMatrix fast_limit_lt(const ModelSpec& model, std::span<const double> s, double t,
                                     int steps = kDefaultRk4Steps) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("fast_limit_lt: t must lie in [0,1]");
  TransformMatrix out;
  out.values = fast_limit_chi(model, s, std::pow(t, 1.0 / model.beta), steps).at_end();
  out.s.assign(s.begin(), s.end());
  out.t = t;
  return out;
}

// chi(s,.) of the equilibrium regime: diagonal source beta lambda
// sum_l (e^{s_l x_l} - 1) at state x.
inline OdeGrid equilibrium_limit_chi(const ModelSpec& model, std::span<const double> s,
                                     double u_max, int steps = kDefaultRk4Steps) {
  detail::check_nonpositive(s, model.k);
  const Matrix drift = model.lambda * (model.P - Matrix::identity(model.space.size()));
  std::vector<double> d(model.space.size(), 0.0);
  for (std::size_t x = 0; x < model.space.size(); ++x) {
    const auto& st = model.space.state(x);
    for (int j = 0; j < model.k; ++j) d[x] += std::expm1(s[j] * st[j]);
  }
  const Matrix source = model.beta * model.lambda * Matrix::diagonal(d);
  const double beta = model.beta;
  auto coefficient = [drift, source, beta](double u) {
    return beta * std::pow(u, beta - 1.0) * drift + source;
  };
  return solve_linear_matrix_ode(coefficient, Matrix::identity(model.space.size()), u_max, steps);
}

inline TransformMatrix equilibrium_limit_lt(const ModelSpec& model, std::span<const double> s,
                                            double t, int steps = kDefaultRk4Steps) {
  if (!(t >= 0.0 && t <= 1.0))
    throw std::invalid_argument("equilibrium_limit_lt: t must lie in [0,1]");
  TransformMatrix out;
  out.values = equilibrium_limit_chi(model, s, std::pow(t, 1.0 / model.beta), steps).at_end();
  out.s.assign(s.begin(), s.end());
  out.t = t;
  return out;
}

// One realization of the inhomogeneous chain X^beta on [start_time, 1],
// piecewise constant and right continuous.
struct InhomChainPath {
  double start_time = 0.0;
  std::size_t start_state = 0;
  std::vector<double> jump_times;    // strictly increasing, within (start_time, 1]
  std::vector<std::size_t> states;   // state entered at each jump
  std::size_t final_state = 0;

  std::size_t state_at(double t) const {
    std::size_t st = start_state;
    for (std::size_t i = 0; i < jump_times.size() && jump_times[i] <= t; ++i) st = states[i];
    return st;
  }

  // integral over [start_time, 1] of component `queue` (1-based) of the path.
  double occupation(const StateSpace& space, int queue) const {
    double total = 0.0;
    double t_prev = start_time;
    std::size_t st = start_state;
    for (std::size_t i = 0; i < jump_times.size(); ++i) {
      total += space.state(st)[queue - 1] * (jump_times[i] - t_prev);
      t_prev = jump_times[i];
      st = states[i];
    }
    total += space.state(st)[queue - 1] * (1.0 - t_prev);
    return total;
  }
};

// Chain with inhomogeneous generator beta (1-t)^(beta-1) lambda (P - I),
// simulated exactly through the deterministic clock change
// h(t) = 1 - (1-t)^beta: a homogeneous chain with generator lambda (P - I)
// (uniformization rate lambda, kernel P) runs on [h(start_time), 1] and its
// event clocks map back through h^{-1}(u) = 1 - (1-u)^(1/beta).
inline InhomChainPath sample_time_changed_chain(const Matrix& p, double lambda, double beta,
                                                double start_time, std::size_t start_state,
                                                Rng& rng) {
  if (!(start_time >= 0.0 && start_time <= 1.0))
    throw std::invalid_argument("sample_time_changed_chain: start_time must lie in [0,1]");
  InhomChainPath path;
  path.start_time = start_time;
  path.start_state = start_state;
  const double u0 = 1.0 - std::pow(1.0 - start_time, beta);
  const std::uint64_t events = rng.poisson(lambda * (1.0 - u0));
  const auto clocks = rng.sorted_uniforms(events, u0, 1.0);
  std::size_t x = start_state;
  const std::size_t n = p.rows();
  for (double u : clocks) {
    std::vector<double> row(n);
    for (std::size_t y = 0; y < n; ++y) row[y] = p(x, y);
    const std::size_t y = rng.sample_row(row);
    if (y != x) {
      path.jump_times.push_back(1.0 - std::pow(1.0 - u, 1.0 / beta));
      path.states.push_back(y);
      x = y;
    }
  }
  path.final_state = x;
  return path;
}

inline InhomChainPath sample_chain_beta(const ModelSpec& model, double start_time,
                                        std::size_t start_state, Rng& rng) {
  if (start_state >= model.space.size())
    throw std::invalid_argument("sample_chain_beta: start_state out of range");
  return sample_time_changed_chain(model.P, model.lambda, model.beta, start_time, start_state,
                                   rng);
}

// Feynman-Kac estimate of the fast limit: paths of X^beta from 1 - t^(1/beta),
// weighted by exp(sum_j s_j beta lambda int X_j^beta dv).
inline McTransform fast_limit_mc(const ModelSpec& model, std::span<const double> s, double t,
                                 std::uint64_t trials, std::uint64_t seed, int workers = 0) {
  detail::check_nonpositive(s, model.k);
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("fast_limit_mc: t must lie in [0,1]");
  const double t0 = 1.0 - std::pow(t, 1.0 / model.beta);
  const std::vector<double> sv(s.begin(), s.end());
  const std::size_t n = model.space.size();
  return detail::mc_matrix_estimate(
      n, n, trials, seed, workers, [&model, sv, t0](std::size_t row, Rng& rng) {
        const InhomChainPath path = sample_chain_beta(model, t0, row, rng);
        double exponent = 0.0;
        for (int j = 0; j < model.k; ++j)
          exponent += sv[j] * model.beta * model.lambda * path.occupation(model.space, j + 1);
        return detail::PathOutcome{path.final_state, std::exp(exponent)};
      });
}

// Equilibrium-limit estimate: same chain plus k independent Poisson processes
// of rate beta lambda; Z_j sums X_j^beta over the points of the j-th process.
inline McTransform equilibrium_limit_mc(const ModelSpec& model, std::span<const double> s,
                                        double t, std::uint64_t trials, std::uint64_t seed,
                                        int workers = 0) {
  detail::check_nonpositive(s, model.k);
  if (!(t >= 0.0 && t <= 1.0))
    throw std::invalid_argument("equilibrium_limit_mc: t must lie in [0,1]");
  const double t0 = 1.0 - std::pow(t, 1.0 / model.beta);
  const std::vector<double> sv(s.begin(), s.end());
  const std::size_t n = model.space.size();
  return detail::mc_matrix_estimate(
      n, n, trials, seed, workers, [&model, sv, t0](std::size_t row, Rng& rng) {
        const InhomChainPath path = sample_chain_beta(model, t0, row, rng);
        double exponent = 0.0;
        for (int j = 0; j < model.k; ++j) {
          const std::uint64_t points = rng.poisson(model.beta * model.lambda * (1.0 - t0));
          double z = 0.0;
          for (std::uint64_t i = 0; i < points; ++i) {
            const double u = t0 + (1.0 - t0) * rng.u01();
            z += model.space.state(path.state_at(u))[j];
          }
          exponent += sv[j] * z;
        }
        return detail::PathOutcome{path.final_state, std::exp(exponent)};
      });
}

// Piecewise-constant function on [0,1]: value values[i] on
// [breaks[i], breaks[i+1]) with breaks[0] = 0 and breaks.back() = 1.
struct StepFunction {
  std::vector<double> breaks;
  std::vector<double> values;

  StepFunction(std::vector<double> b, std::vector<double> v)
      : breaks(std::move(b)), values(std::move(v)) {
    if (breaks.size() != values.size() + 1 || breaks.front() != 0.0 || breaks.back() != 1.0)
      throw std::invalid_argument("StepFunction: need breaks 0 = b0 < ... < bn = 1");
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
      if (!(breaks[i] < breaks[i + 1]))
        throw std::invalid_argument("StepFunction: breaks must be strictly increasing");
  }

  double at(double t) const {
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
      if (t < breaks[i + 1]) return values[i];
    return values.back();
  }
};

struct CampbellResult {
  double mc_estimate = 0.0;
  double mc_std_error = 0.0;
  double analytic = 0.0;
};

// Checks E[exp(int f dnu)] = exp(int (e^f - 1) xi dv) for a Poisson process
// nu of intensity xi on [0,1].
inline CampbellResult campbell_check(const StepFunction& f, double xi, std::uint64_t trials,
                                     std::uint64_t seed, int workers = 0) {
  if (!(xi > 0.0)) throw std::invalid_argument("campbell_check: xi must be positive");
  const McTransform est = detail::mc_matrix_estimate(
      1, 1, trials, seed, workers, [&f, xi](std::size_t, Rng& rng) {
        const std::uint64_t points = rng.poisson(xi);
        double integral = 0.0;
        for (std::uint64_t i = 0; i < points; ++i) integral += f.at(rng.u01());
        return detail::PathOutcome{0, std::exp(integral)};
      });
  CampbellResult out;
  out.mc_estimate = est.estimate(0, 0);
  out.mc_std_error = est.std_error(0, 0);
  double exponent = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i)
    exponent += std::expm1(f.values[i]) * xi * (f.breaks[i + 1] - f.breaks[i]);
  out.analytic = std::exp(exponent);
  return out;
}

}  // namespace switchq
