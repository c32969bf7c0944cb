#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace vacsim {

namespace parallel_detail {
inline std::atomic<int>& thread_override() {
  static std::atomic<int> n{0};
  return n;
}
} // namespace parallel_detail

/// Worker count: explicit override, else VACSIM_THREADS, else hardware concurrency.
inline int thread_count() {
  if (int n = parallel_detail::thread_override().load(); n > 0) return n;
  if (const char* env = std::getenv("VACSIM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline void set_thread_count(int n) { parallel_detail::thread_override() = n; }

/// Runs f(begin, end) over [0, n) split into contiguous chunks, one per worker.
/// Chunk boundaries depend only on n and the worker count.
template <class F>
void parallel_for(std::size_t n, F&& f, std::size_t min_chunk = 4096) {
  const std::size_t workers =
      std::min<std::size_t>(thread_count(), std::max<std::size_t>(1, n / std::max<std::size_t>(1, min_chunk)));
  if (workers <= 1) {
    f(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex m;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk, e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&, b, e] {
      try {
        f(b, e);
      } catch (...) {
        std::lock_guard lk(m);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Sum of g(i) over [0, n) with a fixed chunking, so the result is reproducible for
/// a given worker count and within rounding across worker counts.
template <class T, class G>
T parallel_sum(std::size_t n, G&& g, std::size_t min_chunk = 4096) {
  const std::size_t blocks = std::max<std::size_t>(1, (n + min_chunk - 1) / min_chunk);
  std::vector<T> partial(blocks, T{});
  parallel_for(
      blocks,
      [&](std::size_t b0, std::size_t b1) {
        for (std::size_t b = b0; b < b1; ++b) {
          T acc{};
          const std::size_t e = std::min(n, (b + 1) * min_chunk);
          for (std::size_t i = b * min_chunk; i < e; ++i) acc += g(i);
          partial[b] = acc;
        }
      },
      1);
  T total{};
  for (const auto& p : partial) total += p;
  return total;
}

} // namespace vacsim
