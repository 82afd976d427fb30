#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "switchq/matrix.hpp"
#include "switchq/parallel.hpp"
#include "switchq/rng.hpp"

namespace switchq {

// Entrywise Monte Carlo estimate of a transform-style matrix: row x holds the
// mean of w * 1[path from x lands in y], with per-entry standard errors.
struct McTransform {
  Matrix estimate;
  Matrix std_error;
  std::uint64_t trials = 0;
};

namespace detail {

// One path outcome: terminal column index plus its weight.
struct PathOutcome {
  std::size_t terminal;
  double weight;
};

// Runs `trials` paths per row. path_fn(row, rng) -> PathOutcome. The stream
// for (row, block) is keyed seed and row * kMcBlocks + block; block partial
// sums are merged in fixed order so the result does not depend on workers.
template <typename PathFn>
McTransform mc_matrix_estimate(std::size_t rows, std::size_t cols, std::uint64_t trials,
                               std::uint64_t seed, int workers, PathFn&& path_fn) {
  if (trials == 0) throw std::invalid_argument("mc_matrix_estimate: trials must be >= 1");
  struct BlockSums {
    std::vector<double> w;
    std::vector<double> w2;
  };
  std::vector<BlockSums> sums(rows * kMcBlocks);
  const int items = static_cast<int>(rows) * kMcBlocks;
  run_partitioned(items, worker_count(workers), [&](int item) {
    const std::size_t row = static_cast<std::size_t>(item) / kMcBlocks;
    const int block = item % kMcBlocks;
    BlockSums& bs = sums[item];
    bs.w.assign(cols, 0.0);
    bs.w2.assign(cols, 0.0);
    Rng rng(seed, static_cast<std::uint64_t>(item));
    const std::uint64_t n = block_trials(trials, block);
    for (std::uint64_t i = 0; i < n; ++i) {
      const PathOutcome out = path_fn(row, rng);
      bs.w[out.terminal] += out.weight;
      bs.w2[out.terminal] += out.weight * out.weight;
    }
  });
  McTransform result;
  result.estimate = Matrix(rows, cols);
  result.std_error = Matrix(rows, cols);
  result.trials = trials;
  const double n = static_cast<double>(trials);
  for (std::size_t row = 0; row < rows; ++row) {
    std::vector<double> w(cols, 0.0), w2(cols, 0.0);
    for (int block = 0; block < kMcBlocks; ++block) {
      const BlockSums& bs = sums[row * kMcBlocks + block];
      for (std::size_t y = 0; y < cols; ++y) {
        w[y] += bs.w[y];
        w2[y] += bs.w2[y];
      }
    }
    for (std::size_t y = 0; y < cols; ++y) {
      const double mean = w[y] / n;
      const double var = std::max(0.0, w2[y] / n - mean * mean);
      result.estimate(row, y) = mean;
      result.std_error(row, y) = std::sqrt(var / n);
    }
  }
  return result;
}

}  // namespace detail

}  // namespace switchq
