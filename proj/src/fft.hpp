#pragma once

#include <fftw3.h>

#include <mutex>

namespace tor::detail {

// FFTW planning is not reentrant; plans are built and destroyed under this lock.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace tor::detail
