#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "switchq/matrix.hpp"

namespace switchq {

// Modulating state space S = {0,...,K}^k in lexicographic order. The order is
// fixed so that state indices are reproducible across runs and file formats.
class StateSpace {
 public:
  static constexpr std::size_t kDefaultCap = 4096;

  static StateSpace enumerate(int k, int K, std::size_t cap = kDefaultCap) {
    if (k < 1) throw std::invalid_argument("StateSpace: k must be >= 1");
    if (K < 0) throw std::invalid_argument("StateSpace: K must be >= 0");
    double sized = std::pow(static_cast<double>(K) + 1.0, k);
    if (sized > static_cast<double>(cap)) {
      std::ostringstream msg;
      msg << "StateSpace: (K+1)^k = " << sized << " exceeds cap " << cap;
      throw std::invalid_argument(msg.str());
    }
    StateSpace s;
    s.k_ = k;
    s.K_ = K;
    const std::size_t n = static_cast<std::size_t>(sized + 0.5);
    s.states_.reserve(n);
    std::vector<int> tuple(k, 0);
    for (std::size_t idx = 0; idx < n; ++idx) {
      s.states_.push_back(tuple);
      for (int j = k - 1; j >= 0; --j) {
        if (++tuple[j] <= K) break;
        tuple[j] = 0;
      }
    }
    return s;
  }

  int k() const { return k_; }
  int K() const { return K_; }
  std::size_t size() const { return states_.size(); }

  const std::vector<int>& state(std::size_t idx) const { return states_.at(idx); }

  std::size_t index_of(std::span<const int> tuple) const {
    if (tuple.size() != static_cast<std::size_t>(k_))
      throw std::invalid_argument("StateSpace: tuple arity mismatch");
    std::size_t idx = 0;
    for (int v : tuple) {
      if (v < 0 || v > K_) throw std::invalid_argument("StateSpace: component out of range");
      idx = idx * (K_ + 1) + static_cast<std::size_t>(v);
    }
    return idx;
  }

  // Rendered like "1-0-1"; used in CSV output.
  std::string label(std::size_t idx) const {
    std::ostringstream out;
    const auto& st = state(idx);
    for (int j = 0; j < k_; ++j) {
      if (j) out << '-';
      out << st[j];
    }
    return out.str();
  }

 private:
  int k_ = 0;
  int K_ = 0;
  std::vector<std::vector<int>> states_;
};

// Diagonal matrix Delta_i with entry x_i at state x. queue is 1-based.
inline Matrix delta_matrix(const StateSpace& space, int queue) {
  if (queue < 1 || queue > space.k())
    throw std::invalid_argument("delta_matrix: queue index out of range");
  std::vector<double> d(space.size());
  for (std::size_t x = 0; x < space.size(); ++x)
    d[x] = static_cast<double>(space.state(x)[queue - 1]);
  return Matrix::diagonal(d);
}

namespace detail {

// States reachable from `from` through positive entries of P.
inline std::vector<bool> reachable_set(const Matrix& p, std::size_t from) {
  const std::size_t n = p.rows();
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    const std::size_t x = stack.back();
    stack.pop_back();
    for (std::size_t y = 0; y < n; ++y) {
      if (!seen[y] && p(x, y) > 0.0) {
        seen[y] = true;
        stack.push_back(y);
      }
    }
  }
  return seen;
}

inline void check_row_stochastic(const Matrix& p, double tol = 1e-12) {
  if (p.rows() != p.cols()) throw std::invalid_argument("P must be square");
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < p.cols(); ++j) {
      if (p(i, j) < 0.0) {
        std::ostringstream msg;
        msg << "P(" << i << "," << j << ") = " << p(i, j) << " is negative";
        throw std::invalid_argument(msg.str());
      }
      sum += p(i, j);
    }
    if (std::fabs(sum - 1.0) > tol) {
      std::ostringstream msg;
      msg << "row " << i << " of P sums to " << sum << ", expected 1 within " << tol;
      throw std::invalid_argument(msg.str());
    }
  }
}

// Throws naming the states unreachable from the given one.
inline void check_irreducible(const Matrix& p) {
  const std::size_t n = p.rows();
  const Matrix pt = p.transpose();
  for (int dir = 0; dir < 2; ++dir) {
    const auto seen = reachable_set(dir == 0 ? p : pt, 0);
    std::vector<std::size_t> missing;
    for (std::size_t y = 0; y < n; ++y)
      if (!seen[y]) missing.push_back(y);
    if (!missing.empty()) {
      std::ostringstream msg;
      msg << "P is reducible: state" << (missing.size() > 1 ? "s {" : " {");
      for (std::size_t i = 0; i < missing.size(); ++i) msg << (i ? "," : "") << missing[i];
      msg << "} " << (dir == 0 ? "unreachable from" : "cannot reach") << " state 0";
      throw std::invalid_argument(msg.str());
    }
  }
}

}  // namespace detail

// Base model: k queues, batch components in {0,...,K}, Poisson arrival rate
// lambda, embedded chain P over S, Pareto tail index alpha, beta = 1/(1-alpha).
struct ModelSpec {
  int k = 0;
  int K = 0;
  double lambda = 0.0;
  Matrix P;
  double alpha = 0.0;
  double beta = 0.0;
  StateSpace space;

  static ModelSpec make(int k, int K, double lambda, Matrix P, double alpha,
                        std::size_t cap = StateSpace::kDefaultCap) {
    ModelSpec m = make_unichain(k, K, lambda, std::move(P), alpha, cap);
    detail::check_irreducible(m.P);
    return m;
  }

  // Skips the irreducibility check. Intended for degenerate oracle models
  // (e.g. a chain forced into one state) where transient states are harmless.
  static ModelSpec make_unichain(int k, int K, double lambda, Matrix P, double alpha,
                                 std::size_t cap = StateSpace::kDefaultCap) {
    ModelSpec m;
    m.space = StateSpace::enumerate(k, K, cap);
    if (P.rows() != m.space.size() || P.cols() != m.space.size()) {
      std::ostringstream msg;
      msg << "P is " << P.rows() << "x" << P.cols() << ", expected " << m.space.size() << "x"
          << m.space.size() << " for (k=" << k << ", K=" << K << ")";
      throw std::invalid_argument(msg.str());
    }
    detail::check_row_stochastic(P);
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
    m.k = k;
    m.K = K;
    m.lambda = lambda;
    m.P = std::move(P);
    m.alpha = alpha;
    m.beta = 1.0 / (1.0 - alpha);
    return m;
  }
};

struct StationaryDist {
  std::vector<double> pi;
};

// Unique stationary row vector of an irreducible row-stochastic P, by a direct
// linear solve: (P' - I) pi' = 0 with the last balance equation replaced by
// the normalization row.
inline StationaryDist stationary_distribution(const Matrix& p) {
  detail::check_row_stochastic(p);
  detail::check_irreducible(p);
  const std::size_t n = p.rows();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = p(j, i) - (i == j ? 1.0 : 0.0);
  for (std::size_t j = 0; j < n; ++j) a(n - 1, j) = 1.0;
  Matrix b(n, 1);
  b(n - 1, 0) = 1.0;
  Matrix x = lu_solve(std::move(a), std::move(b));
  StationaryDist out;
  out.pi.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.pi[i] = x(i, 0);
  return out;
}

// P_n = P/n^gamma + (1 - 1/n^gamma) I, the slowed-down chain. Satisfies
// lambda n^gamma (P_n - I) = lambda (P - I).
inline Matrix scaled_transition(const Matrix& p, long long n, double gamma) {
  if (n < 1) throw std::invalid_argument("scaled_transition: n must be >= 1");
  if (!(gamma > 0.0)) throw std::invalid_argument("scaled_transition: gamma must be positive");
  const double r = std::pow(static_cast<double>(n), -gamma);
  Matrix out = p * r;
  for (std::size_t i = 0; i < p.rows(); ++i) out(i, i) += 1.0 - r;
  return out;
}

// Time reversal P^(r) = diag(pi)^-1 P' diag(pi).
inline Matrix reversed_transition(const Matrix& p, const std::vector<double>& pi) {
  if (pi.size() != p.rows()) throw std::invalid_argument("reversed_transition: pi length mismatch");
  for (double v : pi)
    if (!(v > 0.0))
      throw std::invalid_argument("reversed_transition: zero stationary mass");
  Matrix out(p.rows(), p.cols());
  for (std::size_t x = 0; x < p.rows(); ++x)
    for (std::size_t y = 0; y < p.cols(); ++y) out(x, y) = pi[y] * p(y, x) / pi[x];
  return out;
}

namespace detail {

inline void check_nonpositive(std::span<const double> s, int k) {
  if (s.size() != static_cast<std::size_t>(k))
    throw std::invalid_argument("s must have one component per queue");
  for (double v : s)
    if (v > 0.0) throw std::invalid_argument("s components must be nonpositive");
}

inline void check_survival_values(std::span<const double> v, int k) {
  if (v.size() != static_cast<std::size_t>(k))
    throw std::invalid_argument("survival values must have one entry per queue");
  for (double x : v)
    if (!(x >= 0.0 && x <= 1.0))
      throw std::invalid_argument("survival values must lie in [0,1]");
}

}  // namespace detail

// Diagonal of pi_tilde(s,r): prod_j ((e^{s_j x_j} - 1) v_j + 1) at state x,
// where v_j = P[L_j > r].
inline std::vector<double> pi_tilde_diag(const StateSpace& space, std::span<const double> s,
                                         std::span<const double> survival_values) {
  detail::check_nonpositive(s, space.k());
  detail::check_survival_values(survival_values, space.k());
  std::vector<double> diag(space.size(), 1.0);
  for (std::size_t x = 0; x < space.size(); ++x) {
    const auto& st = space.state(x);
    double prod = 1.0;
    for (int j = 0; j < space.k(); ++j)
      prod *= std::expm1(s[j] * st[j]) * survival_values[j] + 1.0;
    diag[x] = prod;
  }
  return diag;
}

// Diagonal of pi_tilde(s,r) - I, accumulated through the subset-product
// expansion prod_j (1 + a_j) - 1 = sum over nonempty subsets of prod a_l,
// evaluated by the recurrence E <- E + a (1 + E). This never subtracts two
// near-identity quantities, which matters when the a_j are O(n^-alpha).
inline std::vector<double> pi_tilde_minus_one_diag(const StateSpace& space,
                                                   std::span<const double> s,
                                                   std::span<const double> survival_values) {
  detail::check_nonpositive(s, space.k());
  detail::check_survival_values(survival_values, space.k());
  std::vector<double> diag(space.size(), 0.0);
  for (std::size_t x = 0; x < space.size(); ++x) {
    const auto& st = space.state(x);
    double acc = 0.0;
    for (int j = 0; j < space.k(); ++j) {
      const double a = std::expm1(s[j] * st[j]) * survival_values[j];
      acc += a * (1.0 + acc);
    }
    diag[x] = acc;
  }
  return diag;
}

inline Matrix pi_tilde(const StateSpace& space, std::span<const double> s,
                       std::span<const double> survival_values) {
  return Matrix::diagonal(pi_tilde_diag(space, s, survival_values));
}

// Q_tilde(s,r) = pi_tilde(s,r) P'.
inline Matrix q_tilde(const StateSpace& space, std::span<const double> s,
                      std::span<const double> survival_values, const Matrix& p) {
  const auto diag = pi_tilde_diag(space, s, survival_values);
  Matrix out = p.transpose();
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) *= diag[i];
  return out;
}

}  // namespace switchq
