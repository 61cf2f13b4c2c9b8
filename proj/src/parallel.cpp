#include "aplab/parallel.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace aplab {

namespace {

int default_threads() {
  const unsigned hc = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hc, 1u, 8u));
}

int g_threads = default_threads();

}  // namespace

int thread_count() { return g_threads; }

void set_thread_count(int n) { g_threads = std::max(1, n); }

int num_chunks(std::int64_t n) {
  if (n <= 0) return 0;
  return static_cast<int>(std::min<std::int64_t>(g_threads, n));
}

void parallel_chunks(std::int64_t n,
                     const std::function<void(int, std::int64_t, std::int64_t)>& fn) {
  const int k = num_chunks(n);
  if (k == 0) return;
  if (k == 1) {
    fn(0, 0, n);
    return;
  }
  const std::int64_t base = n / k;
  const std::int64_t rem = n % k;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(k));
  std::int64_t at = 0;
  for (int c = 0; c < k; ++c) {
    const std::int64_t len = base + (c < rem ? 1 : 0);
    pool.emplace_back(fn, c, at, at + len);
    at += len;
  }
  for (auto& t : pool) t.join();
}

}  // namespace aplab
