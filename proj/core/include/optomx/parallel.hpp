#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace optomx {

// Static block partition of [0, n) over `threads` workers. Each index is
// processed exactly once and results land in caller-owned slots, so output
// is identical for any thread count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (n == 0) return;
  if (threads <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Pairwise (cascade) summation: a fixed reduction tree independent of
// traversal order, so serial and parallel callers agree bit-for-bit.
inline double pairwise_sum(const double* x, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = x[0];
    for (std::size_t i = 1; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& x) {
  return pairwise_sum(x.data(), x.size());
}

inline double pairwise_mean(const std::vector<double>& x) {
  return x.empty() ? 0.0 : pairwise_sum(x) / static_cast<double>(x.size());
}

}  // namespace optomx
