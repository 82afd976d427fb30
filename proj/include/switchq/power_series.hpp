#pragma once

#include <cmath>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "switchq/limit_laws.hpp"
#include "switchq/matrix.hpp"
#include "switchq/state_space.hpp"
#include "switchq/transform_engine.hpp"

namespace switchq {

// Rational tail index alpha = 1 - p/q with coprime 0 < p < q; beta = q/p.
struct RationalTail {
  long long p = 0;
  long long q = 0;

  static RationalTail make(long long p, long long q) {
    if (!(0 < p && p < q)) throw std::invalid_argument("RationalTail: need 0 < p < q");
    if (std::gcd(p, q) != 1) throw std::invalid_argument("RationalTail: p and q must be coprime");
    return RationalTail{p, q};
  }

  double alpha() const { return 1.0 - static_cast<double>(p) / static_cast<double>(q); }
  double beta() const { return static_cast<double>(q) / static_cast<double>(p); }
};

// Truncated power-series solution of Y' = (Q1 t^a + Q2 t^(p-1)) Y, Y(0) = I,
// as Y(t) = sum_j U_j t^j. Evaluation happens in the variable u = t^(1/p) of
// the original (fractional-exponent) equation.
struct SeriesSolution {
  std::vector<Matrix> coefficients;  // U_0 ... U_J
  long long p = 1;
  int truncation = 0;
  double tail_estimate = 0.0;  // max-abs of the last retained coefficient
};

constexpr int kSeriesCoefficientCap = 512;

// Matching powers of t in Y' = (Q1 t^a + Q2 t^(p-1)) Y gives
// j U_j = Q2 U_{j-p} + Q1 U_{j-a-1} with vanishing negative indices, so
//   U_j = 0                                  for 1 <= j < p,
//   U_j = Q2 U_{j-p} / j                     for p <= j < a+1,
//   U_j = [Q2 U_{j-p} + Q1 U_{j-a-1}] / j    for j >= a+1.
inline SeriesSolution series_coefficients(const Matrix& q1, const Matrix& q2, long long p,
                                          long long q_exponent, int truncation) {
  if (truncation < 0) throw std::invalid_argument("series_coefficients: truncation must be >= 0");
  if (truncation > kSeriesCoefficientCap) {
    std::ostringstream msg;
    msg << "series_coefficients: truncation " << truncation << " exceeds cap "
        << kSeriesCoefficientCap;
    throw std::invalid_argument(msg.str());
  }
  if (p < 1) throw std::invalid_argument("series_coefficients: p must be >= 1");
  if (q_exponent < 0) throw std::invalid_argument("series_coefficients: exponent must be >= 0");
  const std::size_t n = q1.rows();
  SeriesSolution sol;
  sol.p = p;
  sol.truncation = truncation;
  sol.coefficients.reserve(truncation + 1);
  sol.coefficients.push_back(Matrix::identity(n));
  for (int j = 1; j <= truncation; ++j) {
    Matrix u(n, n);
    if (j >= p) u += q2 * sol.coefficients[j - p];
    if (j >= q_exponent + 1) u += q1 * sol.coefficients[j - q_exponent - 1];
    u *= 1.0 / j;
    sol.coefficients.push_back(std::move(u));
  }
  sol.tail_estimate = sol.coefficients.back().max_abs();
  return sol;
}

struct SeriesValue {
  Matrix value;
  double truncation_indicator = 0.0;  // magnitude of the last retained term
};

// Horner evaluation of sum_j U_j t^(j/p) in the variable u = t^(1/p).
inline SeriesValue evaluate_series(const SeriesSolution& sol, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("evaluate_series: t must lie in [0,1]");
  const double u = std::pow(t, 1.0 / static_cast<double>(sol.p));
  Matrix acc = sol.coefficients.back();
  for (std::size_t j = sol.coefficients.size() - 1; j-- > 0;) {
    acc *= u;
    acc += sol.coefficients[j];
  }
  SeriesValue out;
  out.value = std::move(acc);
  out.truncation_indicator =
      sol.coefficients.back().max_abs() * std::pow(u, static_cast<double>(sol.truncation));
  return out;
}

// The substituted fast-limit equation chi_check(s,t) = chi(s,t^p) has two
// printed candidates for the Q1 term; the derived one is
// q lambda (P - I) t^(q-1) (chain rule through t^p with beta = q/p), the other
// is (p+q) lambda (P - I) t^q. The RK4 solver arbitrates; derived is default.
enum class SeriesMode { derived, paper_printed };

inline const char* series_mode_name(SeriesMode m) {
  return m == SeriesMode::derived ? "derived" : "paper-printed";
}

inline SeriesSolution fast_chi_series(const ModelSpec& model, const RationalTail& tail,
                                      std::span<const double> s, int truncation,
                                      SeriesMode mode = SeriesMode::derived) {
  if (std::fabs(model.alpha - tail.alpha()) > 1e-12)
    throw std::invalid_argument("fast_chi_series: model alpha does not match rational tail");
  detail::check_nonpositive(s, model.k);
  const Matrix drift = model.lambda * (model.P - Matrix::identity(model.space.size()));
  const Matrix q2 =
      static_cast<double>(tail.p) * tail.beta() * model.lambda * detail::sum_s_delta(model, s);
  const Matrix q1 = (mode == SeriesMode::derived)
                        ? static_cast<double>(tail.q) * drift
                        : static_cast<double>(tail.p + tail.q) * drift;
  const long long exponent = (mode == SeriesMode::derived) ? tail.q - 1 : tail.q;
  return series_coefficients(q1, q2, tail.p, exponent, truncation);
}

constexpr int kDefaultSeriesTruncation = 60;

// Series route to the fast-limit transform at original time t: evaluates
// chi(s, t^(1/beta)) = chi_check(s, t^(1/q)).
inline TransformMatrix fast_series_transform(const ModelSpec& model, const RationalTail& tail,
                                             std::span<const double> s, double t,
                                             int truncation = kDefaultSeriesTruncation,
                                             SeriesMode mode = SeriesMode::derived) {
  const SeriesSolution sol = fast_chi_series(model, tail, s, truncation, mode);
  TransformMatrix out;
  out.values = evaluate_series(sol, std::pow(t, 1.0 / tail.beta())).value;
  out.s.assign(s.begin(), s.end());
  out.t = t;
  return out;
}

}  // namespace switchq
