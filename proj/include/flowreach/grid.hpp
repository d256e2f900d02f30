#ifndef FLOWREACH_GRID_HPP
#define FLOWREACH_GRID_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "flowreach/vec.hpp"

namespace flowreach {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Uniform Cartesian grid over an axis-aligned box. `cells` counts cells per
/// axis; the node lattice has cells+1 nodes per axis. Spacing is required to
/// be the same on every axis to within 1e-12. Solvers additionally require
/// at least 8 cells per axis (require_solver_grid); tiny grids are still
/// representable so persisted fields of any size round-trip.
class Grid {
 public:
  Grid(const VecN& min, const VecN& max, std::span<const std::int64_t> cells);

  int dim() const { return dim_; }
  double spacing() const { return h_; }
  const VecN& min() const { return min_; }
  VecN max() const;
  Box box() const { return Box{min_, max()}; }

  std::int64_t cells(int axis) const { return cells_[axis]; }
  std::int64_t nodes(int axis) const { return cells_[axis] + 1; }
  std::int64_t total_nodes() const { return total_nodes_; }
  std::int64_t node_stride(int axis) const { return stride_[axis]; }

  /// Flat index; row-major with the last axis varying fastest.
  std::int64_t flat(std::span<const std::int64_t> idx) const {
    std::int64_t f = 0;
    for (int a = 0; a < dim_; ++a) f += idx[a] * stride_[a];
    return f;
  }
  void unflat(std::int64_t flat, std::span<std::int64_t> idx) const {
    for (int a = 0; a < dim_; ++a) {
      idx[a] = flat / stride_[a];
      flat -= idx[a] * stride_[a];
    }
  }

  VecN position(std::span<const std::int64_t> idx) const {
    VecN p(dim_);
    for (int a = 0; a < dim_; ++a) p[a] = min_[a] + static_cast<double>(idx[a]) * h_;
    return p;
  }
  VecN position(std::int64_t flat) const {
    std::array<std::int64_t, kMaxDim> idx{};
    unflat(flat, std::span<std::int64_t>(idx.data(), dim_));
    return position(std::span<const std::int64_t>(idx.data(), dim_));
  }

  /// Nearest node to x (clamped to the grid).
  std::int64_t nearest_node(const VecN& x) const;

  /// Distance from x to the closest box face (negative outside).
  double margin(const VecN& x) const;

 private:
  int dim_ = 0;
  VecN min_;
  double h_ = 0.0;
  std::array<std::int64_t, kMaxDim> cells_{};
  std::array<std::int64_t, kMaxDim> stride_{};
  std::int64_t total_nodes_ = 0;
};

/// One scalar per grid node. +inf is the "never reached" sentinel for
/// arrival-time fields.
class ScalarGridField {
 public:
  ScalarGridField(const Grid& grid, double fill = 0.0)
      : grid_(grid), values_(static_cast<std::size_t>(grid.total_nodes()), fill) {}

  const Grid& grid() const { return grid_; }
  double operator[](std::int64_t i) const { return values_[static_cast<std::size_t>(i)]; }
  double& operator[](std::int64_t i) { return values_[static_cast<std::size_t>(i)]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }

  /// Multilinear interpolation at x. Returns +inf if any corner of the
  /// enclosing cell is +inf.
  double interpolate(const VecN& x) const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Boolean mask over grid nodes.
struct GridMask {
  Grid grid;
  std::vector<std::uint8_t> on;

  bool test(std::int64_t i) const { return on[static_cast<std::size_t>(i)] != 0; }
  std::int64_t count() const;
};

/// True for nodes at least `band` away from every box face. Values inside
/// the band are influenced by the hard-wall boundary treatment and are
/// reported as untrusted.
std::vector<std::uint8_t> trusted_nodes(const Grid& grid, double band);

/// Throws unless every axis has at least 8 cells.
void require_solver_grid(const Grid& grid);

}  // namespace flowreach

#endif  // FLOWREACH_GRID_HPP
