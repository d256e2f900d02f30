#ifndef FLOWREACH_RNG_HPP
#define FLOWREACH_RNG_HPP

#include <cstdint>

#include "flowreach/vec.hpp"

namespace flowreach {

/// SplitMix64. Implemented by hand so streams are identical on every
/// platform and standard library; std::uniform_real_distribution makes
/// no such promise.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  VecN next_point(const Box& box) {
    VecN p(box.dim());
    for (int a = 0; a < box.dim(); ++a) p[a] = next_in(box.lo[a], box.hi[a]);
    return p;
  }

 private:
  std::uint64_t state_;
};

/// i-th element of the van der Corput sequence in the given base.
inline double van_der_corput(std::uint64_t i, std::uint32_t base) {
  double x = 0.0;
  double denom = 1.0;
  while (i > 0) {
    denom *= base;
    x += static_cast<double>(i % base) / denom;
    i /= base;
  }
  return x;
}

/// i-th Halton point mapped into the box. Deterministic low-discrepancy
/// samples for sup-norm estimation and probe lattices.
inline VecN halton_point(std::uint64_t i, const Box& box) {
  static constexpr std::uint32_t primes[kMaxDim] = {2, 3, 5, 7, 11, 13, 17, 19};
  VecN p(box.dim());
  for (int a = 0; a < box.dim(); ++a)
    p[a] = box.lo[a] + box.extent(a) * van_der_corput(i + 1, primes[a]);
  return p;
}

}  // namespace flowreach

#endif  // FLOWREACH_RNG_HPP
