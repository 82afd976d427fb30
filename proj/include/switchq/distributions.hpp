#pragma once

#include <cmath>
#include <stdexcept>

#include "switchq/rng.hpp"

namespace switchq {

// Pareto service law with tail index alpha in (0,1): P[L > t] = min(1, t^-alpha).
// The tail constant is exactly 1, so t^alpha * P[L > t] -> 1.
struct ParetoService {
  double alpha;

  explicit ParetoService(double a) : alpha(a) {
    if (!(a > 0.0 && a < 1.0))
      throw std::invalid_argument("ParetoService: alpha must lie in (0,1)");
  }

  double survival(double t) const {
    if (t < 0.0) throw std::invalid_argument("survival: t must be nonnegative");
    if (t <= 1.0) return 1.0;
    return std::pow(t, -alpha);
  }

  // P[L/n > t] = P[L > n t].
  double scaled_survival(long long n, double t) const {
    if (n < 1) throw std::invalid_argument("scaled_survival: n must be >= 1");
    return survival(static_cast<double>(n) * t);
  }

  // Inverse-transform sample: U^(-1/alpha) with U uniform on (0,1].
  double sample(Rng& rng) const { return std::pow(rng.u01_open(), -1.0 / alpha); }
};

inline double pareto_survival(double alpha, double t) { return ParetoService(alpha).survival(t); }

inline double pareto_scaled_survival(double alpha, long long n, double t) {
  return ParetoService(alpha).scaled_survival(n, t);
}

}  // namespace switchq
