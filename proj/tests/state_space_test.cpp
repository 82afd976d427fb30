#include "switchq/state_space.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "switchq/rng.hpp"

using switchq::Matrix;
using switchq::ModelSpec;
using switchq::StateSpace;

TEST_CASE("enumeration is lexicographic with size (K+1)^k") {
  const StateSpace s11 = StateSpace::enumerate(1, 1);
  CHECK(s11.size() == 2);
  CHECK(s11.state(0) == std::vector<int>{0});
  CHECK(s11.state(1) == std::vector<int>{1});

  const StateSpace s22 = StateSpace::enumerate(2, 2);
  CHECK(s22.size() == 9);
  CHECK(s22.state(0) == std::vector<int>{0, 0});
  CHECK(s22.state(8) == std::vector<int>{2, 2});

  const StateSpace s31 = StateSpace::enumerate(3, 1);
  CHECK(s31.size() == 8);
  const std::array<int, 3> probe{1, 0, 1};
  CHECK(s31.index_of(probe) == 5);
  CHECK(s31.state(5) == std::vector<int>{1, 0, 1});
}

TEST_CASE("index and tuple round-trip on every state") {
  const StateSpace space = StateSpace::enumerate(3, 2);
  for (std::size_t i = 0; i < space.size(); ++i) CHECK(space.index_of(space.state(i)) == i);
}

TEST_CASE("enumeration rejects spaces beyond the cap") {
  CHECK_THROWS_AS(StateSpace::enumerate(7, 3), std::invalid_argument);  // 4^7 = 16384
  CHECK_NOTHROW(StateSpace::enumerate(6, 3));                           // 4^6 = 4096
}

TEST_CASE("delta matrices pick out components") {
  const StateSpace s11 = StateSpace::enumerate(1, 1);
  const Matrix d1 = switchq::delta_matrix(s11, 1);
  CHECK(d1(0, 0) == 0.0);
  CHECK(d1(1, 1) == 1.0);

  const StateSpace s21 = StateSpace::enumerate(2, 1);
  const Matrix d2 = switchq::delta_matrix(s21, 2);
  // states (0,0),(0,1),(1,0),(1,1)
  CHECK(d2(0, 0) == 0.0);
  CHECK(d2(1, 1) == 1.0);
  CHECK(d2(2, 2) == 0.0);
  CHECK(d2(3, 3) == 1.0);

  CHECK_THROWS_AS(switchq::delta_matrix(s21, 3), std::invalid_argument);
  CHECK_THROWS_AS(switchq::delta_matrix(s21, 0), std::invalid_argument);
}

TEST_CASE("trace of delta equals the component sum over states") {
  const StateSpace space = StateSpace::enumerate(2, 2);
  for (int queue = 1; queue <= 2; ++queue) {
    const Matrix d = switchq::delta_matrix(space, queue);
    double trace = 0.0, want = 0.0;
    for (std::size_t x = 0; x < space.size(); ++x) {
      trace += d(x, x);
      want += space.state(x)[queue - 1];
    }
    CHECK(trace == want);
  }
}

TEST_CASE("sum of s_i Delta_i is diagonal nonpositive for s <= 0") {
  const StateSpace space = StateSpace::enumerate(2, 2);
  switchq::Rng rng(31, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const double s1 = -2.0 * rng.u01(), s2 = -2.0 * rng.u01();
    const Matrix m = s1 * switchq::delta_matrix(space, 1) + s2 * switchq::delta_matrix(space, 2);
    for (std::size_t i = 0; i < space.size(); ++i) {
      CHECK(m(i, i) <= 0.0);
      for (std::size_t j = 0; j < space.size(); ++j)
        if (i != j) CHECK(m(i, j) == 0.0);
    }
  }
}

TEST_CASE("stationary distribution of small chains") {
  {
    const auto pi = switchq::stationary_distribution(Matrix{{1.0}}).pi;
    CHECK(pi.size() == 1);
    CHECK(pi[0] == doctest::Approx(1.0).epsilon(1e-14));
  }
  {
    const auto pi = switchq::stationary_distribution(Matrix{{0.0, 1.0}, {1.0, 0.0}}).pi;
    CHECK(pi[0] == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(pi[1] == doctest::Approx(0.5).epsilon(1e-13));
  }
  {
    const auto pi = switchq::stationary_distribution(Matrix{{0.3, 0.7}, {0.6, 0.4}}).pi;
    CHECK(pi[0] == doctest::Approx(6.0 / 13.0).epsilon(1e-13));
    CHECK(pi[1] == doctest::Approx(7.0 / 13.0).epsilon(1e-13));
  }
}

TEST_CASE("stationary distribution satisfies pi P = pi and sums to one") {
  switchq::Rng rng(17, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 2 + rep % 4;
    Matrix p(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum += p(i, j) = rng.u01() + 0.02;
      for (std::size_t j = 0; j < n; ++j) p(i, j) /= sum;
    }
    const auto pi = switchq::stationary_distribution(p).pi;
    double total = 0.0;
    for (double v : pi) total += v;
    CHECK(std::fabs(total - 1.0) < 1e-12);
    for (std::size_t j = 0; j < n; ++j) {
      double balance = 0.0;
      for (std::size_t i = 0; i < n; ++i) balance += pi[i] * p(i, j);
      CHECK(std::fabs(balance - pi[j]) < 1e-10);
    }
  }
}

TEST_CASE("reducible chains are rejected with the unreachable class named") {
  const Matrix forced{{0.0, 1.0}, {0.0, 1.0}};
  try {
    switchq::stationary_distribution(forced);
    FAIL("expected a reducibility error");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("reducible") != std::string::npos);
    CHECK(msg.find("0") != std::string::npos);
  }
}

TEST_CASE("scaled transition") {
  const Matrix p{{0.0, 1.0}, {1.0, 0.0}};
  CHECK(switchq::max_abs_diff(switchq::scaled_transition(p, 1, 0.7), p) == 0.0);
  const Matrix id = Matrix::identity(2);
  CHECK(switchq::max_abs_diff(switchq::scaled_transition(id, 37, 0.4), id) < 1e-15);
  const Matrix p4 = switchq::scaled_transition(p, 4, 0.5);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(p4(i, j) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("lambda n^gamma (P_n - I) reproduces lambda (P - I)") {
  const Matrix p{{0.3, 0.7}, {0.6, 0.4}};
  const double lambda = 1.7, gamma = 0.6;
  const Matrix want = lambda * (p - Matrix::identity(2));
  for (long long n : {1LL, 10LL, 100LL, 1000LL}) {
    const Matrix pn = switchq::scaled_transition(p, n, gamma);
    const Matrix got =
        lambda * std::pow(static_cast<double>(n), gamma) * (pn - Matrix::identity(2));
    CHECK(switchq::max_abs_diff(got, want) < 1e-12);
  }
}

TEST_CASE("reversed transition: two-state chains are reversible") {
  const Matrix p{{0.3, 0.7}, {0.6, 0.4}};
  const auto pi = switchq::stationary_distribution(p).pi;
  const Matrix rev = switchq::reversed_transition(p, pi);
  CHECK(switchq::max_abs_diff(rev, p) < 1e-12);
}

TEST_CASE("reversed transition is an involution preserving pi") {
  switchq::Rng rng(91, 0);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 3 + rep % 3;
    Matrix p(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum += p(i, j) = rng.u01() + 0.02;
      for (std::size_t j = 0; j < n; ++j) p(i, j) /= sum;
    }
    const auto pi = switchq::stationary_distribution(p).pi;
    const Matrix rev = switchq::reversed_transition(p, pi);
    // row stochastic
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum += rev(i, j);
      CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
    // pi stationary for the reversed chain
    for (std::size_t j = 0; j < n; ++j) {
      double balance = 0.0;
      for (std::size_t i = 0; i < n; ++i) balance += pi[i] * rev(i, j);
      CHECK(std::fabs(balance - pi[j]) < 1e-10);
    }
    CHECK(switchq::max_abs_diff(switchq::reversed_transition(rev, pi), p) < 1e-12);
  }
}

TEST_CASE("reversed transition rejects zero stationary mass") {
  const Matrix p{{0.5, 0.5}, {0.5, 0.5}};
  CHECK_THROWS_AS(switchq::reversed_transition(p, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("pi_tilde at s = 0 and at expired service is the identity") {
  const StateSpace space = StateSpace::enumerate(2, 1);
  const std::vector<double> zero{0.0, 0.0};
  const std::vector<double> v{0.4, 0.9};
  CHECK(switchq::max_abs_diff(switchq::pi_tilde(space, zero, v),
                              Matrix::identity(space.size())) == 0.0);
  const std::vector<double> s{-1.0, -2.0};
  const std::vector<double> expired{0.0, 0.0};
  CHECK(switchq::max_abs_diff(switchq::pi_tilde(space, s, expired),
                              Matrix::identity(space.size())) == 0.0);
}

TEST_CASE("pi_tilde one-factor value is frozen") {
  const StateSpace space = StateSpace::enumerate(1, 1);
  const std::vector<double> s{-1.0};
  const std::vector<double> v{0.5};
  const Matrix m = switchq::pi_tilde(space, s, v);
  CHECK(m(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m(1, 1) == doctest::Approx(0.6839397205857212).epsilon(1e-15));
}

TEST_CASE("pi_tilde entries live in (0,1] for s <= 0") {
  const StateSpace space = StateSpace::enumerate(2, 2);
  switchq::Rng rng(13, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const std::vector<double> s{-3.0 * rng.u01(), -3.0 * rng.u01()};
    const std::vector<double> v{rng.u01(), rng.u01()};
    const auto diag = switchq::pi_tilde_diag(space, s, v);
    for (double d : diag) {
      CHECK(d > 0.0);
      CHECK(d <= 1.0);
    }
    // expansion form agrees with direct product minus one
    const auto minus = switchq::pi_tilde_minus_one_diag(space, s, v);
    for (std::size_t x = 0; x < diag.size(); ++x)
      CHECK(minus[x] == doctest::Approx(diag[x] - 1.0).epsilon(1e-13));
  }
}

TEST_CASE("pi_tilde rejects positive arguments") {
  const StateSpace space = StateSpace::enumerate(1, 1);
  const std::vector<double> bad{0.1};
  const std::vector<double> v{0.5};
  CHECK_THROWS_AS(switchq::pi_tilde(space, bad, v), std::invalid_argument);
}

TEST_CASE("q_tilde") {
  const StateSpace space = StateSpace::enumerate(1, 1);
  const Matrix p{{0.3, 0.7}, {0.6, 0.4}};
  const std::vector<double> zero{0.0};
  const std::vector<double> v{0.5};
  CHECK(switchq::max_abs_diff(switchq::q_tilde(space, zero, v, p), p.transpose()) == 0.0);

  // forced chain: row 1 of the transform of the single surviving state
  const Matrix forced{{0.0, 1.0}, {0.0, 1.0}};
  const std::vector<double> s{-1.0};
  const Matrix qt = switchq::q_tilde(space, s, v, forced);
  CHECK(qt(1, 1) == doctest::Approx(0.6839397205857212).epsilon(1e-15));

  // Q_tilde 1 = pi_tilde (P' 1) columnwise mass identity
  switchq::Rng rng(3, 1);
  Matrix pr(2, 2);
  for (std::size_t i = 0; i < 2; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 2; ++j) sum += pr(i, j) = rng.u01() + 0.05;
    for (std::size_t j = 0; j < 2; ++j) pr(i, j) /= sum;
  }
  const Matrix qt2 = switchq::q_tilde(space, s, v, pr);
  const std::vector<double> ones{1.0, 1.0};
  const auto lhs = qt2.row_times(ones);
  const auto pt_ones = pr.transpose().row_times(ones);
  const auto diag = switchq::pi_tilde_diag(space, s, v);
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(lhs[i] == doctest::Approx(diag[i] * pt_ones[i]).epsilon(1e-13));
}

TEST_CASE("ModelSpec validation") {
  const Matrix good{{0.3, 0.7}, {0.6, 0.4}};
  CHECK_NOTHROW(ModelSpec::make(1, 1, 1.0, good, 0.5));
  CHECK_THROWS_AS(ModelSpec::make(1, 1, 1.0, good, 1.2), std::invalid_argument);
  CHECK_THROWS_AS(ModelSpec::make(1, 1, -1.0, good, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(ModelSpec::make(1, 1, 1.0, Matrix{{0.5, 0.4}, {0.6, 0.4}}, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(ModelSpec::make(1, 1, 1.0, Matrix{{1.0, 0.0}, {0.0, 1.0}}, 0.5),
                  std::invalid_argument);  // reducible
  CHECK_NOTHROW(ModelSpec::make_unichain(1, 1, 1.0, Matrix{{0.0, 1.0}, {0.0, 1.0}}, 0.5));
  const ModelSpec m = ModelSpec::make(1, 1, 1.0, good, 0.5);
  CHECK(m.beta == doctest::Approx(2.0).epsilon(1e-15));
}
