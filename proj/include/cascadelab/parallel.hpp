#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cascadelab {

/// Environment variable that overrides an automatic thread count.
inline constexpr const char* kThreadsEnv = "CASCADELAB_THREADS";

/// 0 means automatic: the environment override if set, else the hardware
/// concurrency. Always at least 1.
int resolve_threads(int requested);

/// Calls fn(i) for i in [0, count) on up to `threads` workers. Results must be
/// written to slot i by the caller so that reductions do not depend on
/// completion order. Rethrows the exception of the lowest failing index.
template <class F>
void parallel_for(std::size_t count, int threads, F&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(resolve_threads(threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = count;
  std::exception_ptr failure;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace cascadelab
