#pragma once
// Minimal fork-join parallel loop.
//
// Work items must be independent and write only to their own output slots;
// combined with per-item random streams (rng.hpp) this makes every parallel
// loop in the library produce results identical to the serial run,
// regardless of the thread count.

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace cyclewarp {

/// Resolve a requested thread count: a positive request wins, otherwise the
/// CYCLEWARP_THREADS environment variable, otherwise the hardware count.
inline int effective_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CYCLEWARP_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Run fn(i) for i in [0, count) on up to `threads` workers.
/// Exceptions are captured and the first one is rethrown on the caller.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (count == 0) return;
  const int workers =
      static_cast<int>(std::min<std::size_t>(count, static_cast<std::size_t>(
                                                        threads > 0 ? threads : 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (;;) {
          const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
          if (i >= count) break;
          fn(i);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace cyclewarp
