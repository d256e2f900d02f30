#include "flowreach/oracle.hpp"

#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace flowreach {

std::vector<std::array<std::int64_t, kMaxDim>> stencil_offsets(int dim, int k) {
  std::vector<std::array<std::int64_t, kMaxDim>> out;
  std::array<std::int64_t, kMaxDim> o{};
  const auto side = static_cast<std::int64_t>(2 * k + 1);
  std::int64_t total = 1;
  for (int a = 0; a < dim; ++a) total *= side;
  for (std::int64_t code = 0; code < total; ++code) {
    std::int64_t rest = code;
    std::int64_t g = 0;
    bool zero = true;
    for (int a = 0; a < dim; ++a) {
      o[a] = rest % side - k;
      rest /= side;
      g = std::gcd(g, std::llabs(o[a]));
      if (o[a] != 0) zero = false;
    }
    if (zero || g != 1) continue;
    out.push_back(o);
  }
  return out;
}

EdgeTime edge_time(const VectorField& field, const VecN& a, const VecN& b) {
  const VecN diff = b - a;
  const double len = diff.norm();
  if (len == 0.0) return {false, 0.0};
  const VecN e = diff * (1.0 / len);
  const VecN v = field((a + b) * 0.5);
  const double v_par = v.dot(e);
  const double perp2 = std::max(0.0, v.norm2() - v_par * v_par);
  if (perp2 > 1.0) return {false, 0.0};
  const double s = v_par + std::sqrt(1.0 - perp2);
  if (!(s > 0.0)) return {false, 0.0};
  return {true, len / s};
}

StencilGraph StencilGraph::make(const Grid& grid, int k) {
  if (k < 1 || k > 4) throw std::invalid_argument("StencilGraph: k must be in [1, 4]");
  return StencilGraph{grid, k, stencil_offsets(grid.dim(), k)};
}

ScalarGridField dijkstra_times(const VectorField& field, const Grid& grid, const VecN& source,
                               int k) {
  if (field.dim() != grid.dim())
    throw std::invalid_argument("dijkstra_times: field/grid dimension mismatch");
  require_solver_grid(grid);
  const StencilGraph graph = StencilGraph::make(grid, k);
  const int d = grid.dim();

  // The source must be a grid node.
  const std::int64_t src = grid.nearest_node(source);
  if ((grid.position(src) - source).norm() > 1e-9 * grid.spacing())
    throw std::invalid_argument("dijkstra_times: source is not a grid node");

  ScalarGridField dist(grid, kInf);
  using Entry = std::pair<double, std::int64_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  dist[src] = 0.0;
  pq.emplace(0.0, src);

  std::array<std::int64_t, kMaxDim> idx{};
  while (!pq.empty()) {
    const auto [t, i] = pq.top();
    pq.pop();
    if (t > dist[i]) continue;  // stale entry
    grid.unflat(i, std::span<std::int64_t>(idx.data(), d));
    const VecN xi = grid.position(i);
    for (const auto& o : graph.offsets) {
      bool ok = true;
      std::int64_t j = i;
      for (int a = 0; a < d; ++a) {
        const std::int64_t na = idx[a] + o[a];
        if (na < 0 || na > grid.cells(a)) {
          ok = false;
          break;
        }
        j += o[a] * grid.node_stride(a);
      }
      if (!ok) continue;
      const EdgeTime et = edge_time(field, xi, grid.position(j));
      if (!et.passable) continue;
      const double nt = t + et.time;
      if (nt < dist[j]) {
        dist[j] = nt;
        pq.emplace(nt, j);
      }
    }
  }
  return dist;
}

}  // namespace flowreach
