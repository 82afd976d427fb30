#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "switchq/distributions.hpp"
#include "switchq/matrix.hpp"
#include "switchq/state_space.hpp"

namespace switchq {

// Rescaling applied to the base model: arrival rate lambda n^gamma, chain
// P_n = P/n^gamma + (1-1/n^gamma) I, service times divided by n.
struct ScalingSpec {
  long long n = 1;
  double gamma = 0.5;

  ScalingSpec() = default;
  ScalingSpec(long long n_, double gamma_) : n(n_), gamma(gamma_) {
    if (n < 1) throw std::invalid_argument("ScalingSpec: n must be >= 1");
    if (!(gamma > 0.0)) throw std::invalid_argument("ScalingSpec: gamma must be positive");
  }
};

// Joint Laplace transform over (initial state, terminal state), at one (s,t).
struct TransformMatrix {
  Matrix values;
  std::vector<double> s;
  double t = 0.0;
};

// Fixed-step solution samples of a matrix linear ODE on a uniform grid.
struct OdeGrid {
  std::vector<double> times;
  std::vector<Matrix> values;

  const Matrix& at_end() const { return values.back(); }
  std::size_t size() const { return times.size(); }
};

namespace detail {

inline void check_coefficient(const Matrix& a, double t) {
  if (!a.all_finite()) {
    std::ostringstream msg;
    msg << "ODE coefficient is not finite at t = " << t;
    throw std::runtime_error(msg.str());
  }
}

}  // namespace detail

// Classical fixed-step RK4 for Y' = A(t) Y, Y(0) = y0, sampled on the
// uniform grid {0, h, ..., t_max}.
inline OdeGrid solve_linear_matrix_ode(const std::function<Matrix(double)>& coefficient,
                                       const Matrix& y0, double t_max, int steps) {
  if (steps < 1) throw std::invalid_argument("solve_linear_matrix_ode: steps must be >= 1");
  if (t_max < 0.0) throw std::invalid_argument("solve_linear_matrix_ode: t_max must be >= 0");
  OdeGrid grid;
  grid.times.push_back(0.0);
  grid.values.push_back(y0);
  if (t_max == 0.0) return grid;
  const double h = t_max / steps;
  Matrix y = y0;
  for (int i = 0; i < steps; ++i) {
    const double t = h * i;
    const double tm = t + 0.5 * h;
    const double tp = t + h;
    Matrix a1 = coefficient(t);
    detail::check_coefficient(a1, t);
    Matrix am = coefficient(tm);
    detail::check_coefficient(am, tm);
    Matrix a2 = coefficient(tp);
    detail::check_coefficient(a2, tp);
    Matrix k1 = a1 * y;
    Matrix k2 = am * (y + (0.5 * h) * k1);
    Matrix k3 = am * (y + (0.5 * h) * k2);
    Matrix k4 = a2 * (y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    grid.times.push_back(tp);
    grid.values.push_back(y);
  }
  return grid;
}

// Right-multiplied variant Y' = Y B(t), via the transposed system.
inline OdeGrid solve_linear_matrix_ode_right(const std::function<Matrix(double)>& coefficient,
                                             const Matrix& y0, double t_max, int steps) {
  auto transposed = [&coefficient](double t) { return coefficient(t).transpose(); };
  OdeGrid grid = solve_linear_matrix_ode(transposed, y0.transpose(), t_max, steps);
  for (auto& m : grid.values) m = m.transpose();
  return grid;
}

constexpr int kDefaultRk4Steps = 2000;

// d/dt psi = [lambda (P - I) + lambda P (pi_tilde(s,t) - I)] psi, psi(s,0) = I.
inline OdeGrid solve_psi(const ModelSpec& model, std::span<const double> s, double t_max,
                         int steps = kDefaultRk4Steps) {
  detail::check_nonpositive(s, model.k);
  const ParetoService service(model.alpha);
  const std::vector<double> sv(s.begin(), s.end());
  const Matrix drift = model.lambda * (model.P - Matrix::identity(model.space.size()));
  auto coefficient = [&model, &service, sv, drift](double t) {
    std::vector<double> v(model.k, service.survival(t));
    const auto d = pi_tilde_minus_one_diag(model.space, sv, v);
    return drift + model.lambda * model.P.column_scaled(d);
  };
  return solve_linear_matrix_ode(coefficient, Matrix::identity(model.space.size()), t_max, steps);
}

// Rescaled transform: d/dt psi_n = [lambda (P - I) + lambda n^gamma P_n
// (pi_tilde_n(s,t) - I)] psi_n, with pi_tilde_n built from P[L > n t].
inline OdeGrid solve_psi_n(const ModelSpec& model, const ScalingSpec& scaling,
                           std::span<const double> s, double t_max,
                           int steps = kDefaultRk4Steps) {
  detail::check_nonpositive(s, model.k);
  const ParetoService service(model.alpha);
  const std::vector<double> sv(s.begin(), s.end());
  const Matrix pn = scaled_transition(model.P, scaling.n, scaling.gamma);
  const Matrix drift = model.lambda * (model.P - Matrix::identity(model.space.size()));
  const double rate = model.lambda * std::pow(static_cast<double>(scaling.n), scaling.gamma);
  auto coefficient = [&model, &service, &scaling, sv, pn, drift, rate](double t) {
    std::vector<double> v(model.k, service.scaled_survival(scaling.n, t));
    const auto d = pi_tilde_minus_one_diag(model.space, sv, v);
    return drift + rate * pn.column_scaled(d);
  };
  return solve_linear_matrix_ode(coefficient, Matrix::identity(model.space.size()), t_max, steps);
}

enum class ChiRegime { slow_or_equilibrium, fast };

// Time-changed prelimit transform chi_n(s,t) = psi_n(s*, t^beta), solved as
// d/dt chi_n = beta t^(beta-1) [lambda (P - I) + lambda n^gamma P_n
// (pi_tilde_n(s*, t^beta) - I)] chi_n, where s* = s in the slow/equilibrium
// regimes and s* = s / n^(gamma - alpha) in the fast regime.
inline OdeGrid solve_chi_n(const ModelSpec& model, const ScalingSpec& scaling,
                           std::span<const double> s, ChiRegime regime, double t_max,
                           int steps = kDefaultRk4Steps) {
  detail::check_nonpositive(s, model.k);
  std::vector<double> sv(s.begin(), s.end());
  if (regime == ChiRegime::fast) {
    if (!(scaling.gamma > model.alpha))
      throw std::invalid_argument(
          "solve_chi_n: fast regime requires gamma > alpha (normalization n^(gamma-alpha))");
    const double norm = std::pow(static_cast<double>(scaling.n), scaling.gamma - model.alpha);
    for (auto& v : sv) v /= norm;
  }
  const ParetoService service(model.alpha);
  const Matrix pn = scaled_transition(model.P, scaling.n, scaling.gamma);
  const Matrix drift = model.lambda * (model.P - Matrix::identity(model.space.size()));
  const double rate = model.lambda * std::pow(static_cast<double>(scaling.n), scaling.gamma);
  const double beta = model.beta;
  auto coefficient = [&model, &service, &scaling, sv, pn, drift, rate, beta](double t) {
    const double speed = beta * std::pow(t, beta - 1.0);
    std::vector<double> v(model.k, service.scaled_survival(scaling.n, std::pow(t, beta)));
    const auto d = pi_tilde_minus_one_diag(model.space, sv, v);
    Matrix a = drift + rate * pn.column_scaled(d);
    return a *= speed;
  };
  return solve_linear_matrix_ode(coefficient, Matrix::identity(model.space.size()), t_max, steps);
}

}  // namespace switchq
