#pragma once

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace switchq {

// Monte Carlo work is split into a fixed number of blocks regardless of how
// many threads run them; partial results are merged in block order, so the
// output is bit-identical for any worker count.
constexpr int kMcBlocks = 64;

// Resolution order: explicit request, SWITCHQ_WORKERS, hardware concurrency.
inline int worker_count(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SWITCHQ_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs fn(item) for item in [0, items) on `workers` threads pulling from a
// shared counter. fn must only touch per-item state.
template <typename Fn>
void run_partitioned(int items, int workers, Fn&& fn) {
  if (items <= 0) return;
  workers = std::min(std::max(workers, 1), items);
  if (workers == 1) {
    for (int i = 0; i < items; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto drain = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= items) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(drain);
  drain();
  for (auto& th : pool) th.join();
}

// Trials assigned to one block of the fixed partition.
inline std::uint64_t block_trials(std::uint64_t total, int block) {
  const std::uint64_t base = total / kMcBlocks;
  const std::uint64_t rem = total % kMcBlocks;
  return base + (static_cast<std::uint64_t>(block) < rem ? 1 : 0);
}

}  // namespace switchq
