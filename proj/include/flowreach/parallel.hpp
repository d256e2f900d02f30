#ifndef FLOWREACH_PARALLEL_HPP
#define FLOWREACH_PARALLEL_HPP

#include <cstdint>

namespace flowreach {

/// Worker-thread count used by grid sweeps. Results are bit-identical for
/// every setting: parallel loops use static partitions, write disjoint
/// outputs, and reduce only with exact operations (max, integer sums).
void set_thread_count(int n);
int thread_count();

namespace detail {
void parallel_for_impl(std::int64_t n, void (*body)(std::int64_t, std::int64_t, int, void*), void* ctx);
}

/// Runs f(begin, end, worker) over a static partition of [0, n).
/// worker is in [0, thread_count()) and each worker's range is contiguous.
template <typename F>
void parallel_for(std::int64_t n, F&& f) {
  auto thunk = [](std::int64_t b, std::int64_t e, int w, void* ctx) {
    (*static_cast<F*>(ctx))(b, e, w);
  };
  detail::parallel_for_impl(n, thunk, &f);
}

}  // namespace flowreach

#endif  // FLOWREACH_PARALLEL_HPP
