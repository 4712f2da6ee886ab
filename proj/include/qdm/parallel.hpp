#ifndef QDM_PARALLEL_HPP
#define QDM_PARALLEL_HPP

#include <algorithm>
#include <thread>
#include <vector>

namespace qdm {

/// Run fn(begin, end) over [0, n) split into contiguous chunks, one per
/// worker. Each index is processed exactly once and writes only its own
/// output slots, so results are identical for any thread count.
template <typename Fn>
void parallel_for(long n, int threads, Fn&& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || n < 2) {
    fn(0L, n);
    return;
  }
  const int workers = static_cast<int>(std::min<long>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const long chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const long b = w * chunk;
    const long e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace qdm

#endif
