#include "switchq/simulator.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "switchq/rng.hpp"

using switchq::Matrix;
using switchq::ModelSpec;
using switchq::Rng;
using switchq::ScalingSpec;

namespace {

ModelSpec two_state_model() {
  return ModelSpec::make(1, 1, 1.0, Matrix{{0.3, 0.7}, {0.6, 0.4}}, 0.5);
}

}  // namespace

TEST_CASE("path at t = 0 has no arrivals") {
  const ModelSpec model = two_state_model();
  Rng rng(1, 0);
  const auto path = switchq::simulate_path(model, ScalingSpec(10, 0.5), 0.0, 1, rng);
  CHECK(path.arrival_epochs.empty());
  CHECK(path.terminal_chain_state == 1);
  CHECK(path.terminal_queue == std::vector<long>{0});
}

TEST_CASE("queue is bounded by K times the arrival count") {
  const ModelSpec model = ModelSpec::make(
      2, 2, 1.5,
      [] {
        Rng rng(88, 0);
        Matrix p(9, 9);
        for (std::size_t i = 0; i < 9; ++i) {
          double sum = 0.0;
          for (std::size_t j = 0; j < 9; ++j) sum += p(i, j) = rng.u01() + 0.01;
          for (std::size_t j = 0; j < 9; ++j) p(i, j) /= sum;
        }
        return p;
      }(),
      0.5);
  Rng rng(5, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const auto path = switchq::simulate_path(model, ScalingSpec(3, 0.4), 0.9, 0, rng);
    for (long z : path.terminal_queue)
      CHECK(z <= static_cast<long>(model.K * path.arrival_epochs.size()));
  }
}

TEST_CASE("stored fields reconstruct the terminal queue exactly") {
  const ModelSpec model = two_state_model();
  Rng rng(9, 2);
  for (int rep = 0; rep < 100; ++rep) {
    const auto path = switchq::simulate_path(model, ScalingSpec(10, 0.5), 0.7, rep % 2, rng);
    CHECK(path.reconstruct_queue(model.space) == path.terminal_queue);
  }
}

TEST_CASE("frozen identity chain reproduces the M/G/infinity mean") {
  // P = I keeps the chain in state 1, so every arrival brings one customer.
  const ModelSpec model = ModelSpec::make_unichain(1, 1, 1.0, Matrix::identity(2), 0.5);
  Rng rng(33, 0);
  const double t = 0.8;
  const int trials = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < trials; ++i) {
    const auto path = switchq::simulate_path(model, ScalingSpec(1, 0.5), t, 1, rng);
    const double z = static_cast<double>(path.terminal_queue[0]);
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sum2 / trials - mean * mean) / trials);
  // lambda int_0^t P[L > u] du = t below the tail threshold
  CHECK(std::fabs(mean - t) <= 4.0 * se);
}

TEST_CASE("empirical transform rows sum to one at s = 0") {
  const ModelSpec model = two_state_model();
  const std::vector<double> zero{0.0};
  const auto emp =
      switchq::empirical_transform(model, ScalingSpec(10, 0.5), zero, 0.7, 5000, 17);
  for (std::size_t x = 0; x < 2; ++x)
    CHECK(emp.estimate(x, 0) + emp.estimate(x, 1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("empirical transform at t = 0 is exactly the identity") {
  const ModelSpec model = two_state_model();
  const std::vector<double> s{-1.0};
  const auto emp =
      switchq::empirical_transform(model, ScalingSpec(10, 0.5), s, 0.0, 500, 3);
  CHECK(switchq::max_abs_diff(emp.estimate, Matrix::identity(2)) == 0.0);
}

TEST_CASE("empirical transform agrees with the ODE transform") {
  const ModelSpec model = two_state_model();
  const std::vector<double> s{-1.0};
  const ScalingSpec scaling(10, 0.5);
  const auto emp = switchq::empirical_transform(model, scaling, s, 0.7, 30000, 91507);
  const Matrix ode = switchq::solve_psi_n(model, scaling, s, 0.7, 7000).at_end();
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y)
      CHECK(std::fabs(emp.estimate(x, y) - ode(x, y)) <= 4.0 * emp.std_error(x, y));
}

TEST_CASE("terminal-state frequencies match the semigroup marginal") {
  // lambda_n (P_n - I) = lambda (P - I), so the chain marginal ignores n.
  const ModelSpec model = two_state_model();
  const std::vector<double> zero{0.0};
  const ScalingSpec scaling(100, 0.5);
  const double t = 0.6;
  const auto emp = switchq::empirical_transform(model, scaling, zero, t, 50000, 7);
  const Matrix want =
      switchq::expm(t * model.lambda * (model.P - Matrix::identity(2)));
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y)
      CHECK(std::fabs(emp.estimate(x, y) - want(x, y)) <= 4.0 * emp.std_error(x, y));
}

TEST_CASE("estimator brackets the ODE value across independent batches") {
  const ModelSpec model = two_state_model();
  const std::vector<double> s{-1.0};
  const ScalingSpec scaling(10, 0.5);
  const double t = 0.7;
  const Matrix ode = switchq::solve_psi_n(model, scaling, s, t, 7000).at_end();
  int hits = 0;
  for (int batch = 0; batch < 20; ++batch) {
    const auto emp =
        switchq::empirical_transform(model, scaling, s, t, 50000, 1000 + batch);
    bool inside = true;
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t y = 0; y < 2; ++y)
        inside = inside &&
                 std::fabs(emp.estimate(x, y) - ode(x, y)) <= 4.0 * emp.std_error(x, y);
    hits += inside ? 1 : 0;
  }
  CHECK(hits >= 19);
}

TEST_CASE("same seed gives bit-identical results for any worker count") {
  const ModelSpec model = two_state_model();
  const std::vector<double> s{-1.0};
  const ScalingSpec scaling(10, 0.5);
  const auto one = switchq::empirical_transform(model, scaling, s, 0.7, 20000, 5, false, 1);
  const auto four = switchq::empirical_transform(model, scaling, s, 0.7, 20000, 5, false, 4);
  CHECK(one.estimate.same_bits(four.estimate));
  CHECK(one.std_error.same_bits(four.std_error));
  const auto again = switchq::empirical_transform(model, scaling, s, 0.7, 20000, 5, false, 4);
  CHECK(four.estimate.same_bits(again.estimate));
}

TEST_CASE("fast rescaling divides the argument, requires gamma > alpha") {
  const ModelSpec model = two_state_model();
  const std::vector<double> s{-1.0};
  CHECK_THROWS_AS(
      switchq::empirical_transform(model, ScalingSpec(10, 0.5), s, 0.7, 100, 1, true),
      std::invalid_argument);
  const ScalingSpec fast(16, 0.75);
  const auto rescaled = switchq::empirical_transform(model, fast, s, 0.7, 4000, 2, true);
  const double norm = std::pow(16.0, 0.75 - 0.5);
  const std::vector<double> divided{s[0] / norm};
  const auto manual = switchq::empirical_transform(model, fast, divided, 0.7, 4000, 2, false);
  CHECK(rescaled.estimate.same_bits(manual.estimate));
}

TEST_CASE("regime sweep distances shrink with n") {
  const ModelSpec model = two_state_model();
  const std::vector<double> s{-1.0};
  const std::vector<long long> ladder{10, 1000};
  for (double gamma : {0.25, 0.5, 0.75}) {
    const auto rows = switchq::regime_sweep(model, gamma, s, 0.7, ladder, 0, 0, 1000);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].sup_distance < rows[0].sup_distance);
  }
}

TEST_CASE("prelimit contracts toward the limit by a factor of five per regime") {
  // the slow-regime rate is n^(gamma - alpha), so gamma far below alpha is
  // what makes the desk-scale factor visible
  const ModelSpec model = two_state_model();
  const std::vector<double> s{-1.0};
  const std::vector<long long> ladder{10, 10000};
  for (double gamma : {0.1, 0.5, 0.75}) {
    const auto rows = switchq::regime_sweep(model, gamma, s, 0.7, ladder, 0, 0, 2000);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].sup_distance >= 5.0 * rows[1].sup_distance);
  }
}

TEST_CASE("standard errors shrink like the square root of the trial count") {
  const ModelSpec model = two_state_model();
  const std::vector<double> s{-1.0};
  const ScalingSpec scaling(10, 0.5);
  const auto small = switchq::empirical_transform(model, scaling, s, 0.7, 4000, 9);
  const auto large = switchq::empirical_transform(model, scaling, s, 0.7, 64000, 9);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y) {
      CHECK(small.std_error(x, y) >= 0.0);
      const double ratio = small.std_error(x, y) / large.std_error(x, y);
      CHECK(ratio > 2.0);  // sqrt(16) = 4 up to sampling noise
      CHECK(ratio < 8.0);
    }
}

TEST_CASE("regime sweep validates its ladder") {
  const ModelSpec model = two_state_model();
  const std::vector<double> s{-1.0};
  const std::vector<long long> single{50};
  CHECK(switchq::regime_sweep(model, 0.5, s, 0.5, single, 0, 0, 500).size() == 1);
  const std::vector<long long> bad{100, 10};
  CHECK_THROWS_AS(switchq::regime_sweep(model, 0.5, s, 0.5, bad, 0, 0, 500),
                  std::invalid_argument);
}
