#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace bvy {

/// Number of worker threads: the WORKERS environment variable when set,
/// otherwise the hardware concurrency. Results never depend on it.
std::size_t worker_count();

/// Overrides the worker count for this process; 0 restores the default.
void set_worker_count(std::size_t n);

namespace detail {
void run_indexed(std::size_t n_tasks, const std::function<void(std::size_t)>& task);
}

/// Evaluates fn(i) for i in [0, n_tasks) on the worker pool and returns the
/// results in index order, so any subsequent reduction is order-stable.
template <class T, class F>
std::vector<T> map_chunks(std::size_t n_tasks, F&& fn) {
  std::vector<T> out(n_tasks);
  detail::run_indexed(n_tasks, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

/// Splits n items into chunks of at most chunk_size; returns the chunk count.
inline std::size_t chunk_count(std::size_t n, std::size_t chunk_size) {
  return (n + chunk_size - 1) / chunk_size;
}

}  // namespace bvy
