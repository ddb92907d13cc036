#ifndef EVOGRID_PARALLEL_HPP
#define EVOGRID_PARALLEL_HPP

#include <atomic>
#include <thread>
#include <vector>

namespace evogrid {

// Runs f(i) for i in [0, n) on up to `workers` threads. Tasks pick indices
// from a shared counter; callers store results by index, so output is
// independent of scheduling and worker count.
template <typename F>
void parallel_for(int n, int workers, F f) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  auto body = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      f(i);
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min(workers, n);
  pool.reserve(count);
  for (int t = 0; t < count; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
}

inline int default_workers() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 2 : static_cast<int>(hc);
}

}  // namespace evogrid

#endif
