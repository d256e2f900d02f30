#include "flowreach/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace flowreach {

Grid::Grid(const VecN& min, const VecN& max, std::span<const std::int64_t> cells)
    : dim_(min.dim()), min_(min) {
  if (dim_ < 2 || dim_ > kMaxDim) throw std::invalid_argument("Grid: dimension must be in [2, 8]");
  if (max.dim() != dim_ || static_cast<int>(cells.size()) != dim_)
    throw std::invalid_argument("Grid: min/max/cells dimension mismatch");

  h_ = (max[0] - min[0]) / static_cast<double>(cells[0]);
  if (!(h_ > 0.0)) throw std::invalid_argument("Grid: non-positive spacing");
  for (int a = 0; a < dim_; ++a) {
    if (cells[a] < 1) throw std::invalid_argument("Grid: no cells on axis " + std::to_string(a));
    double ha = (max[a] - min[a]) / static_cast<double>(cells[a]);
    if (std::fabs(ha - h_) > 1e-12)
      throw std::invalid_argument("Grid: spacing differs across axes (axis " + std::to_string(a) + ")");
    cells_[a] = cells[a];
  }
  stride_[dim_ - 1] = 1;
  for (int a = dim_ - 2; a >= 0; --a) stride_[a] = stride_[a + 1] * nodes(a + 1);
  total_nodes_ = stride_[0] * nodes(0);
}

VecN Grid::max() const {
  VecN m(dim_);
  for (int a = 0; a < dim_; ++a) m[a] = min_[a] + h_ * static_cast<double>(cells_[a]);
  return m;
}

std::int64_t Grid::nearest_node(const VecN& x) const {
  std::array<std::int64_t, kMaxDim> idx{};
  for (int a = 0; a < dim_; ++a) {
    auto i = static_cast<std::int64_t>(std::llround((x[a] - min_[a]) / h_));
    if (i < 0) i = 0;
    if (i > cells_[a]) i = cells_[a];
    idx[a] = i;
  }
  return flat(std::span<const std::int64_t>(idx.data(), dim_));
}

double Grid::margin(const VecN& x) const {
  double m = kInf;
  VecN mx = max();
  for (int a = 0; a < dim_; ++a) {
    m = std::min(m, x[a] - min_[a]);
    m = std::min(m, mx[a] - x[a]);
  }
  return m;
}

double ScalarGridField::interpolate(const VecN& x) const {
  const int d = grid_.dim();
  std::array<std::int64_t, kMaxDim> base{};
  std::array<double, kMaxDim> frac{};
  for (int a = 0; a < d; ++a) {
    double u = (x[a] - grid_.min()[a]) / grid_.spacing();
    auto i = static_cast<std::int64_t>(std::floor(u));
    if (i < 0) i = 0;
    if (i > grid_.cells(a) - 1) i = grid_.cells(a) - 1;
    base[a] = i;
    frac[a] = u - static_cast<double>(i);
    if (frac[a] < 0.0) frac[a] = 0.0;
    if (frac[a] > 1.0) frac[a] = 1.0;
  }
  double acc = 0.0;
  const int corners = 1 << d;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::int64_t f = 0;
    for (int a = 0; a < d; ++a) {
      const int bit = (c >> a) & 1;
      w *= bit ? frac[a] : (1.0 - frac[a]);
      f += (base[a] + bit) * grid_.node_stride(a);
    }
    const double v = values_[static_cast<std::size_t>(f)];
    if (v == kInf) return kInf;
    acc += w * v;
  }
  return acc;
}

std::int64_t GridMask::count() const {
  std::int64_t n = 0;
  for (auto b : on) n += (b != 0);
  return n;
}

void require_solver_grid(const Grid& grid) {
  for (int a = 0; a < grid.dim(); ++a)
    if (grid.cells(a) < 8)
      throw std::invalid_argument("grid too coarse: solvers need >= 8 cells per axis");
}

std::vector<std::uint8_t> trusted_nodes(const Grid& grid, double band) {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(grid.total_nodes()), 0);
  const int d = grid.dim();
  std::array<std::int64_t, kMaxDim> idx{};
  const auto lo = static_cast<std::int64_t>(std::ceil(band / grid.spacing() - 1e-12));
  for (std::int64_t i = 0; i < grid.total_nodes(); ++i) {
    grid.unflat(i, std::span<std::int64_t>(idx.data(), d));
    bool ok = true;
    for (int a = 0; a < d; ++a)
      if (idx[a] < lo || idx[a] > grid.cells(a) - lo) ok = false;
    out[static_cast<std::size_t>(i)] = ok ? 1 : 0;
  }
  return out;
}

}  // namespace flowreach
