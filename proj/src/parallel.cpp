#include "mvf/parallel.h"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace mvf {

namespace {
std::atomic<int> g_max_threads{0};  // 0 = not set yet, use hardware
}

void set_max_threads(int n) { g_max_threads.store(std::max(1, n)); }

int max_threads() {
  int n = g_max_threads.load();
  if (n > 0) return n;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int64_t begin, int64_t end,
                  const std::function<void(int64_t)>& fn) {
  const int64_t count = end - begin;
  if (count <= 0) return;

  int threads = std::min<int64_t>(max_threads(), count);
  if (threads <= 1 || count < 256) {
    for (int64_t i = begin; i < end; ++i) fn(i);
    return;
  }

  const int64_t chunk = (count + threads - 1) / threads;
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const int64_t lo = begin + t * chunk;
    const int64_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([lo, hi, &fn] {
      for (int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace mvf
