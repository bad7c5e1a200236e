#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace chtwin {

// Runs fn(i) for i in [0, n). With parallel = false (strict mode) the loop is
// sequential. Each index must write only its own output slot so results do not
// depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, bool parallel) {
  const std::size_t workers =
      parallel ? std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), n) : 1;
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace chtwin
