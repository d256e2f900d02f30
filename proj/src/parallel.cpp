#include "flowreach/parallel.hpp"

#include <algorithm>
#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace flowreach {

namespace {
std::atomic<int> g_threads{0};  // 0 = pick from hardware
}

void set_thread_count(int n) { g_threads.store(std::max(0, n)); }

int thread_count() {
  int n = g_threads.load();
  if (n > 0) return n;
#ifdef _OPENMP
  return std::max(1, omp_get_max_threads());
#else
  return 1;
#endif
}

namespace detail {

void parallel_for_impl(std::int64_t n, void (*body)(std::int64_t, std::int64_t, int, void*), void* ctx) {
  if (n <= 0) return;
  const auto nt = static_cast<int>(std::min<std::int64_t>(thread_count(), n));
  if (nt <= 1) {
    body(0, n, 0, ctx);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel num_threads(nt)
  {
    const int t = omp_get_thread_num();
    const std::int64_t chunk = (n + nt - 1) / nt;
    const std::int64_t b = std::min<std::int64_t>(n, static_cast<std::int64_t>(t) * chunk);
    const std::int64_t e = std::min<std::int64_t>(n, b + chunk);
    if (b < e) body(b, e, t, ctx);
  }
#else
  body(0, n, 0, ctx);
#endif
}

}  // namespace detail
}  // namespace flowreach
