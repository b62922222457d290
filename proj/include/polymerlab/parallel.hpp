#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace polymerlab {

// Runs f(i) for i in [0, n) on the OpenMP team. The first exception thrown by any
// iteration is rethrown after the loop; remaining iterations are skipped.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  std::exception_ptr error;
  std::mutex m;
  bool failed = false;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    bool skip;
#pragma omp atomic read
    skip = failed;
    if (skip) continue;
    try {
      f(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(m);
      if (!error) error = std::current_exception();
#pragma omp atomic write
      failed = true;
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace polymerlab
