#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ntknas {

/// Runs fn(i) for i in [begin, end) on up to `threads` workers. Work is split
/// into interleaved stripes so triangular loops stay balanced. The first
/// exception thrown by any worker is rethrown on the caller's thread.
template <class Fn>
void parallel_for(std::size_t begin, std::size_t end, int threads, Fn&& fn) {
  const std::size_t count = end > begin ? end - begin : 0;
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = begin + w; i < end; i += workers) fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ntknas
