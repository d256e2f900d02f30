#ifndef FLOWREACH_VEC_HPP
#define FLOWREACH_VEC_HPP

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>

namespace flowreach {

inline constexpr int kMaxDim = 8;

/// Small fixed-capacity vector for points and velocities in R^d, d in [1, 8].
/// Value type, no heap allocation; the runtime dimension rides along.
class VecN {
 public:
  VecN() = default;
  explicit VecN(int dim, double fill = 0.0) : dim_(dim) {
    assert(dim >= 0 && dim <= kMaxDim);
    for (int i = 0; i < dim_; ++i) c_[i] = fill;
  }
  VecN(std::initializer_list<double> xs) : dim_(static_cast<int>(xs.size())) {
    assert(dim_ <= kMaxDim);
    int i = 0;
    for (double x : xs) c_[i++] = x;
  }

  int dim() const { return dim_; }

  double operator[](int i) const {
    assert(i >= 0 && i < dim_);
    return c_[i];
  }
  double& operator[](int i) {
    assert(i >= 0 && i < dim_);
    return c_[i];
  }

  VecN operator+(const VecN& o) const {
    VecN r(dim_);
    for (int i = 0; i < dim_; ++i) r.c_[i] = c_[i] + o.c_[i];
    return r;
  }
  VecN operator-(const VecN& o) const {
    VecN r(dim_);
    for (int i = 0; i < dim_; ++i) r.c_[i] = c_[i] - o.c_[i];
    return r;
  }
  VecN operator*(double s) const {
    VecN r(dim_);
    for (int i = 0; i < dim_; ++i) r.c_[i] = c_[i] * s;
    return r;
  }
  VecN operator-() const { return *this * -1.0; }
  VecN& operator+=(const VecN& o) {
    for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  VecN& operator-=(const VecN& o) {
    for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  bool operator==(const VecN& o) const {
    if (dim_ != o.dim_) return false;
    for (int i = 0; i < dim_; ++i)
      if (c_[i] != o.c_[i]) return false;
    return true;
  }

  double dot(const VecN& o) const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += c_[i] * o.c_[i];
    return s;
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }

  VecN normalized() const {
    double n = norm();
    if (n == 0.0) throw std::domain_error("VecN::normalized: zero vector");
    return *this * (1.0 / n);
  }

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

inline VecN operator*(double s, const VecN& v) { return v * s; }

/// Axis-aligned box, used for sampling regions and grid extents.
struct Box {
  VecN lo;
  VecN hi;

  int dim() const { return lo.dim(); }
  double extent(int axis) const { return hi[axis] - lo[axis]; }
  bool contains(const VecN& x, double margin = 0.0) const {
    for (int a = 0; a < dim(); ++a)
      if (x[a] < lo[a] + margin || x[a] > hi[a] - margin) return false;
    return true;
  }
};

}  // namespace flowreach

#endif  // FLOWREACH_VEC_HPP
