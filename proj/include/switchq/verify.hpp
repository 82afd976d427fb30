#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "switchq/limit_laws.hpp"
#include "switchq/matrix.hpp"
#include "switchq/power_series.hpp"
#include "switchq/rng.hpp"
#include "switchq/simulator.hpp"
#include "switchq/state_space.hpp"
#include "switchq/transform_engine.hpp"

namespace switchq {

struct CriterionResult {
  int number = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

namespace verify_detail {

inline Matrix random_stochastic(Rng& rng, std::size_t n) {
  Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      p(i, j) = 0.05 + 0.95 * rng.u01();
      sum += p(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) p(i, j) /= sum;
  }
  return p;
}

// The two-state instance shared by criteria 4-7.
inline ModelSpec reference_model() {
  return ModelSpec::make(1, 1, 1.0, Matrix{{0.3, 0.7}, {0.6, 0.4}}, 0.5);
}

// Chain forced into state 1: every arrival brings one customer, so the queue
// is a plain M/G/infinity system and the transform row at state 1 has the
// closed form exp(lambda_n (e^s - 1) int_0^t P[L > n u] du).
inline ModelSpec forced_mg_model() {
  return ModelSpec::make_unichain(1, 1, 1.0, Matrix{{0.0, 1.0}, {0.0, 1.0}}, 0.5);
}

inline double mg_survival_integral(double alpha, long long n, double t) {
  const double nd = static_cast<double>(n);
  if (nd * t <= 1.0) return t;
  return 1.0 / nd + (std::pow(nd * t, 1.0 - alpha) - 1.0) / (nd * (1.0 - alpha));
}

inline std::string fmt(double v) {
  std::ostringstream out;
  out.precision(3);
  out << std::scientific << v;
  return out.str();
}

// Largest |a-b|/se over entries; infinite when an entry differs with zero se.
inline double max_se_multiples(const Matrix& a, const Matrix& b, const Matrix& se) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double diff = std::fabs(a(i, j) - b(i, j));
      if (diff == 0.0) continue;
      const double e = se(i, j);
      worst = std::max(worst, e > 0.0 ? diff / e : std::numeric_limits<double>::infinity());
    }
  return worst;
}

}  // namespace verify_detail

// 1. Semigroup identity: at s = 0 the transform collapses to the chain
// semigroup exp(t lambda (P - I)).
inline CriterionResult verify_semigroup() {
  using namespace verify_detail;
  CriterionResult r;
  r.number = 1;
  r.name = "semigroup";
  Rng rng(20240601, 0);
  const int dims[5][2] = {{1, 1}, {2, 1}, {2, 2}, {1, 1}, {2, 1}};
  const double lambdas[5] = {1.0, 0.7, 1.3, 1.9, 0.5};
  double worst = 0.0;
  for (int inst = 0; inst < 5; ++inst) {
    const int k = dims[inst][0], K = dims[inst][1];
    const std::size_t size = StateSpace::enumerate(k, K).size();
    const ModelSpec model =
        ModelSpec::make(k, K, lambdas[inst], random_stochastic(rng, size), 0.5);
    const std::vector<double> s(model.k, 0.0);
    const OdeGrid grid = solve_psi(model, s, 1.0, 2000);
    const Matrix gen = model.lambda * (model.P - Matrix::identity(size));
    for (int i = 0; i <= 100; ++i) {
      const double t = i / 100.0;
      worst = std::max(worst, (grid.values[i * 20] - expm(t * gen)).inf_norm());
    }
  }
  r.passed = worst <= 1e-8;
  r.detail = "max inf-norm error " + fmt(worst) + " (tolerance 1e-08)";
  return r;
}

// 2. M/G/infinity oracle on the forced chain, base and rescaled.
inline CriterionResult verify_mg_infinity() {
  using namespace verify_detail;
  CriterionResult r;
  r.number = 2;
  r.name = "mg-infinity";
  const ModelSpec model = forced_mg_model();
  const double gamma = 0.5;
  const int steps = 20000;
  double worst = 0.0;
  for (double s1 : {-0.5, -1.0, -2.0}) {
    const std::vector<double> s{s1};
    {
      const OdeGrid grid = solve_psi(model, s, 1.0, steps);
      for (int i = 1; i <= 8; ++i) {
        const double t = i / 8.0;
        const double got = grid.values[i * (steps / 8)](1, 0) + grid.values[i * (steps / 8)](1, 1);
        const double want =
            std::exp(model.lambda * std::expm1(s1) * mg_survival_integral(model.alpha, 1, t));
        worst = std::max(worst, std::fabs(got - want) / want);
      }
    }
    for (long long n : {1LL, 10LL, 100LL}) {
      const ScalingSpec scaling(n, gamma);
      const OdeGrid grid = solve_psi_n(model, scaling, s, 1.0, steps);
      const double rate = model.lambda * std::pow(static_cast<double>(n), gamma);
      for (int i = 1; i <= 8; ++i) {
        const double t = i / 8.0;
        const double got = grid.values[i * (steps / 8)](1, 0) + grid.values[i * (steps / 8)](1, 1);
        const double want =
            std::exp(rate * std::expm1(s1) * mg_survival_integral(model.alpha, n, t));
        worst = std::max(worst, std::fabs(got - want) / want);
      }
    }
  }
  r.passed = worst <= 1e-6;
  r.detail = "max relative error " + fmt(worst) + " over s in {-0.5,-1,-2}, n in {1,10,100}"
             " (tolerance 1e-06)";
  return r;
}

// 3. Series route vs RK4 route for the fast-limit chi, both printed
// coefficient modes; reports which mode matched the ODE.
inline CriterionResult verify_series_vs_ode() {
  using namespace verify_detail;
  CriterionResult r;
  r.number = 3;
  r.name = "series-vs-ode";
  Rng rng(555, 0);
  const int dims[3][2] = {{1, 1}, {1, 3}, {2, 1}};
  std::ostringstream detail;
  bool pass = true;
  for (const auto& [p, q] : {std::pair<long long, long long>{1, 2}, {2, 3}}) {
    const RationalTail tail = RationalTail::make(p, q);
    double worst_derived = 0.0, worst_paper = 0.0;
    for (const auto& dim : dims) {
      const std::size_t size = StateSpace::enumerate(dim[0], dim[1]).size();
      const ModelSpec model =
          ModelSpec::make(dim[0], dim[1], 1.0, random_stochastic(rng, size), tail.alpha());
      const std::vector<double> s(model.k, -1.0);
      const int steps = 8000;
      const OdeGrid reference = fast_limit_chi(model, s, 1.0, steps);
      for (const SeriesMode mode : {SeriesMode::derived, SeriesMode::paper_printed}) {
        int truncation = kDefaultSeriesTruncation;
        SeriesSolution sol = fast_chi_series(model, tail, s, truncation, mode);
        while (sol.tail_estimate > 1e-12 && truncation < 200) {
          truncation += 40;
          sol = fast_chi_series(model, tail, s, truncation, mode);
        }
        double sup = 0.0;
        for (int i = 0; i <= 100; ++i) {
          const double tau = i / 100.0;
          const Matrix got = evaluate_series(sol, tau).value;
          sup = std::max(sup, max_abs_diff(got, reference.values[i * (steps / 100)]));
        }
        (mode == SeriesMode::derived ? worst_derived : worst_paper) =
            std::max(mode == SeriesMode::derived ? worst_derived : worst_paper, sup);
      }
    }
    const bool derived_ok = worst_derived <= 1e-6;
    pass = pass && derived_ok;
    detail << "alpha=" << (q - p) << "/" << q << ": derived mode sup err " << fmt(worst_derived)
           << (derived_ok ? " (matches ODE)" : " (FAILS)") << ", paper-printed mode sup err "
           << fmt(worst_paper) << (worst_paper <= 1e-6 ? " (matches ODE)" : " (does not match)")
           << "; ";
  }
  detail << "tolerance 1e-06";
  r.passed = pass;
  r.detail = detail.str();
  return r;
}

// 4. Theorem-1 deterministic convergence over the n ladder, all three
// regimes, with the pinned factor-5 contraction check.
inline CriterionResult verify_regime_convergence() {
  using namespace verify_detail;
  CriterionResult r;
  r.number = 4;
  r.name = "regime-convergence";
  const ModelSpec model = reference_model();
  const std::vector<double> s{-1.0};
  const std::vector<long long> ladder{10, 100, 1000, 10000};
  const double t = 0.7;
  std::ostringstream detail;
  bool pass = true;
  for (double gamma : {0.25, 0.5, 0.75}) {
    const auto rows = regime_sweep(model, gamma, s, t, ladder, 0, 0, 2000);
    bool decreasing = true;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
      decreasing = decreasing && rows[i + 1].sup_distance < rows[i].sup_distance;
    const double ratio = rows.front().sup_distance / rows.back().sup_distance;
    const bool contraction = ratio >= 5.0;
    pass = pass && decreasing && contraction;
    detail << regime_name(rows.front().regime) << " (gamma=" << gamma << "): distances";
    for (const auto& row : rows) detail << " " << fmt(row.sup_distance);
    detail << ", d(10)/d(10^4)=" << fmt(ratio) << (decreasing ? "" : " NOT DECREASING")
           << (contraction ? "" : " RATIO < 5") << "; ";
  }
  r.passed = pass;
  r.detail = detail.str();
  return r;
}

// 5. Path simulator against the rescaled ODE transform, 4-SE bands.
inline CriterionResult verify_simulator_vs_ode(int workers = 0) {
  using namespace verify_detail;
  CriterionResult r;
  r.number = 5;
  r.name = "simulator-vs-ode";
  const ModelSpec model = reference_model();
  const ScalingSpec scaling(10, 0.5);
  const std::vector<double> s{-1.0};
  const double t = 0.7;
  const EmpiricalTransform emp =
      empirical_transform(model, scaling, s, t, 100000, 91507, false, workers);
  const Matrix ode = solve_psi_n(model, scaling, s, t, 7000).at_end();
  const double worst = max_se_multiples(emp.estimate, ode, emp.std_error);
  r.passed = worst <= 4.0;
  r.detail = "max |empirical - ode| = " + fmt(worst) + " standard errors (limit 4)";
  return r;
}

// 6. Feynman-Kac duality: path-expectation estimate vs the fast-limit ODE.
inline CriterionResult verify_feynman_kac(int workers = 0) {
  using namespace verify_detail;
  CriterionResult r;
  r.number = 6;
  r.name = "feynman-kac";
  const ModelSpec model = reference_model();
  const std::vector<double> s{-1.0};
  double worst = 0.0;
  for (double t : {0.3, 0.7, 1.0}) {
    const McTransform mc = fast_limit_mc(model, s, t, 100000, 62217, workers);
    const Matrix ode = fast_limit_lt(model, s, t, 4000).values;
    worst = std::max(worst, max_se_multiples(mc.estimate, ode, mc.std_error));
  }
  r.passed = worst <= 4.0;
  r.detail = "max |mc - ode| = " + fmt(worst) + " standard errors over t in {0.3,0.7,1.0}"
             " (limit 4)";
  return r;
}

// 7. Equilibrium duality plus the Campbell identity on three step functions.
inline CriterionResult verify_campbell(int workers = 0) {
  using namespace verify_detail;
  CriterionResult r;
  r.number = 7;
  r.name = "campbell";
  const ModelSpec model = reference_model();
  const std::vector<double> s{-1.0};
  double worst = 0.0;
  for (double t : {0.3, 0.7, 1.0}) {
    const McTransform mc = equilibrium_limit_mc(model, s, t, 100000, 77001, workers);
    const Matrix ode = equilibrium_limit_lt(model, s, t, 4000).values;
    worst = std::max(worst, max_se_multiples(mc.estimate, ode, mc.std_error));
  }
  std::ostringstream detail;
  detail << "max |mc - ode| = " << fmt(worst) << " standard errors";
  bool campbell_ok = true;
  const StepFunction fns[3] = {
      StepFunction({0.0, 1.0}, {0.0}),
      StepFunction({0.0, 1.0}, {0.5}),
      StepFunction({0.0, 0.4, 1.0}, {0.7, -0.3}),
  };
  for (int i = 0; i < 3; ++i) {
    const CampbellResult c = campbell_check(fns[i], 2.0, 100000, 30303 + i, workers);
    const double diff = std::fabs(c.mc_estimate - c.analytic);
    const bool ok = diff == 0.0 || diff <= 4.0 * c.mc_std_error;
    campbell_ok = campbell_ok && ok;
    detail << "; campbell f" << i << " |mc - analytic| = " << fmt(diff)
           << (ok ? "" : " EXCEEDS 4 SE");
  }
  r.passed = worst <= 4.0 && campbell_ok;
  r.detail = detail.str() + " (limit 4 SE)";
  return r;
}

// 8. Lemma-1 rate: perturbing the coefficient by B/n moves the solution by
// O(1/n); the measured constant must be stable under doubling.
inline CriterionResult verify_lemma_rate() {
  using namespace verify_detail;
  CriterionResult r;
  r.number = 8;
  r.name = "lemma-rate";
  Rng rng(424242, 0);
  const std::size_t m = 3;
  Matrix a0(m, m), a1(m, m), b0(m, m), b1(m, m);
  for (auto* mat : {&a0, &a1, &b0, &b1})
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) (*mat)(i, j) = 2.0 * rng.u01() - 1.0;
  auto base = [&](double t) { return a0 + t * a1; };
  auto pert = [&](double t) { return b0 + std::sin(3.14159265358979323846 * t) * b1; };
  const OdeGrid ref = solve_linear_matrix_ode(base, Matrix::identity(m), 1.0, 2000);
  std::vector<double> cs;
  std::ostringstream detail;
  for (int n : {8, 16, 32, 64}) {
    auto an = [&](double t) { return base(t) + (1.0 / n) * pert(t); };
    const OdeGrid sol = solve_linear_matrix_ode(an, Matrix::identity(m), 1.0, 2000);
    double sup = 0.0;
    for (std::size_t i = 0; i < sol.values.size(); ++i)
      sup = std::max(sup, (sol.values[i] - ref.values[i]).inf_norm());
    cs.push_back(n * sup);
    detail << "n=" << n << ": C=" << fmt(n * sup) << "; ";
  }
  bool stable = true;
  double worst_ratio = 1.0;
  for (std::size_t i = 0; i + 1 < cs.size(); ++i) {
    const double ratio = std::max(cs[i + 1] / cs[i], cs[i] / cs[i + 1]);
    worst_ratio = std::max(worst_ratio, ratio);
    stable = stable && ratio <= 1.5;
  }
  r.passed = stable;
  r.detail = detail.str() + "worst doubling ratio " + fmt(worst_ratio) + " (limit 1.5)";
  return r;
}

// 9. Worker-count determinism of the Monte Carlo paths behind criteria 5-7.
inline CriterionResult verify_determinism() {
  using namespace verify_detail;
  CriterionResult r;
  r.number = 9;
  r.name = "determinism";
  const ModelSpec model = reference_model();
  const ScalingSpec scaling(10, 0.5);
  const std::vector<double> s{-1.0};
  bool ok = true;
  std::ostringstream detail;
  auto check = [&](const char* what, const std::function<Matrix(int)>& compute) {
    const Matrix one = compute(1);
    const Matrix two = compute(2);
    const Matrix eight = compute(8);
    const bool same = one.same_bits(two) && one.same_bits(eight);
    ok = ok && same;
    detail << what << (same ? " bit-identical; " : " DIFFERS ACROSS WORKERS; ");
  };
  check("empirical_transform", [&](int w) {
    return empirical_transform(model, scaling, s, 0.7, 100000, 91507, false, w).estimate;
  });
  check("fast_limit_mc", [&](int w) {
    return fast_limit_mc(model, s, 0.7, 100000, 62217, w).estimate;
  });
  check("equilibrium_limit_mc", [&](int w) {
    return equilibrium_limit_mc(model, s, 0.7, 100000, 77001, w).estimate;
  });
  check("campbell", [&](int w) {
    const CampbellResult c =
        campbell_check(StepFunction({0.0, 0.4, 1.0}, {0.7, -0.3}), 2.0, 100000, 30305, w);
    Matrix m(1, 2);
    m(0, 0) = c.mc_estimate;
    m(0, 1) = c.mc_std_error;
    return m;
  });
  r.passed = ok;
  r.detail = detail.str() + "(workers 1, 2, 8)";
  return r;
}

struct CriterionSpec {
  const char* name;
  double time_limit_seconds;
  CriterionResult (*run)();
};

inline CriterionResult run_criterion_timed(const CriterionSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  CriterionResult result = spec.run();
  const auto stop = std::chrono::steady_clock::now();
  result.seconds = std::chrono::duration<double>(stop - start).count();
  if (spec.time_limit_seconds > 0.0 && result.seconds > spec.time_limit_seconds) {
    result.passed = false;
    result.detail += " [exceeded time limit " + std::to_string(spec.time_limit_seconds) + "s]";
  }
  return result;
}

inline const std::vector<CriterionSpec>& acceptance_criteria() {
  static const std::vector<CriterionSpec> specs = {
      {"semigroup", 5.0, [] { return verify_semigroup(); }},
      {"mg-infinity", 5.0, [] { return verify_mg_infinity(); }},
      {"series-vs-ode", 10.0, [] { return verify_series_vs_ode(); }},
      {"regime-convergence", 30.0, [] { return verify_regime_convergence(); }},
      {"simulator-vs-ode", 30.0, [] { return verify_simulator_vs_ode(0); }},
      {"feynman-kac", 60.0, [] { return verify_feynman_kac(0); }},
      {"campbell", 60.0, [] { return verify_campbell(0); }},
      {"lemma-rate", 5.0, [] { return verify_lemma_rate(); }},
      {"determinism", 0.0, [] { return verify_determinism(); }},
  };
  return specs;
}

inline std::vector<std::string> acceptance_suite_names() {
  std::vector<std::string> names;
  for (const auto& spec : acceptance_criteria()) names.push_back(spec.name);
  return names;
}

inline CriterionResult run_acceptance_suite(const std::string& name) {
  for (const auto& spec : acceptance_criteria())
    if (name == spec.name) return run_criterion_timed(spec);
  std::ostringstream msg;
  msg << "unknown verify suite '" << name << "'; available:";
  for (const auto& spec : acceptance_criteria()) msg << " " << spec.name;
  throw std::invalid_argument(msg.str());
}

}  // namespace switchq
