#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace tor {

/// Runs f(i) for i in [0, n) on the OpenMP team. Each index must write only
/// its own output slot. The first exception thrown is rethrown afterwards.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  std::exception_ptr err;
  std::mutex mu;
  const long total = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < total; ++i) {
    try {
      f(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(mu);
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

/// Sets the OpenMP team size when n > 0.
void set_thread_count(int n);
int thread_count();

}  // namespace tor
