#include "switchq/rng.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"

using switchq::Rng;

TEST_CASE("streams are reproducible and distinct") {
  Rng a(42, 0), b(42, 0), c(42, 1);
  bool all_equal = true;
  bool any_cross_equal = false;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next();
    all_equal = all_equal && va == b.next();
    any_cross_equal = any_cross_equal || va == c.next();
  }
  CHECK(all_equal);
  CHECK_FALSE(any_cross_equal);
}

TEST_CASE("u01 stays in [0,1) and u01_open in (0,1]") {
  Rng rng(1, 0);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.u01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = rng.u01_open();
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("poisson mean and variance") {
  Rng rng(9, 3);
  const double mean = 4.5;
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = static_cast<double>(rng.poisson(mean));
    sum += v;
    sum2 += v * v;
  }
  const double m = sum / n;
  const double var = sum2 / n - m * m;
  // 4 sigma bands around mean and variance of a Poisson(4.5)
  CHECK(std::fabs(m - mean) < 4.0 * std::sqrt(mean / n));
  CHECK(std::fabs(var - mean) < 4.0 * mean);
}

TEST_CASE("poisson chunking is smooth across large means") {
  Rng rng(11, 0);
  const double mean = 120.0;  // exercises the chunked path
  const int n = 50000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(rng.poisson(mean));
  CHECK(std::fabs(sum / n - mean) < 4.0 * std::sqrt(mean / n));
}

TEST_CASE("poisson of zero mean is zero") {
  Rng rng(2, 0);
  CHECK(rng.poisson(0.0) == 0);
}

TEST_CASE("sample_row respects probabilities") {
  Rng rng(5, 0);
  const std::vector<double> probs{0.2, 0.5, 0.3};
  std::vector<int> counts(3, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[rng.sample_row(probs)];
  for (int j = 0; j < 3; ++j) {
    const double freq = static_cast<double>(counts[j]) / n;
    CHECK(std::fabs(freq - probs[j]) < 4.0 * std::sqrt(probs[j] * (1 - probs[j]) / n));
  }
}

TEST_CASE("sorted_uniforms is sorted and in range") {
  Rng rng(8, 1);
  const auto pts = rng.sorted_uniforms(1000, 0.25, 0.75);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i] >= 0.25);
    CHECK(pts[i] <= 0.75);
    if (i) CHECK(pts[i] >= pts[i - 1]);
  }
}
