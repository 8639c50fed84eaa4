#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace cct {

// Run fn(begin, end, worker_index) over a contiguous partition of [0, n).
// Callers must make per-item work independent of the partition (per-item
// substreams, per-item output slots, or commutative integer merges) so the
// result does not depend on the worker count. The first exception thrown by
// a worker is rethrown on the calling thread.
inline void parallel_chunks(
    std::int64_t n, int workers,
    const std::function<void(std::int64_t, std::int64_t, int)>& fn) {
  if (workers < 1) workers = 1;
  if (workers == 1 || n < 2) {
    fn(0, n, 0);
    return;
  }
  const int w = static_cast<int>(std::min<std::int64_t>(workers, n));
  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (int k = 0; k < w; ++k) {
    const std::int64_t b = n * k / w;
    const std::int64_t e = n * (k + 1) / w;
    pool.emplace_back([&, b, e, k] {
      try {
        fn(b, e, k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace cct
