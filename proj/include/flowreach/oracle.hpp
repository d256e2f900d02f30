#ifndef FLOWREACH_ORACLE_HPP
#define FLOWREACH_ORACLE_HPP

#include <cstdint>
#include <vector>

#include "flowreach/flowfield.hpp"
#include "flowreach/grid.hpp"
#include "flowreach/vec.hpp"

namespace flowreach {

/// Integer offsets with ||o||_inf <= k and coprime components: the move set
/// of the stencil graph. Symmetric as a set; no zero offset.
std::vector<std::array<std::int64_t, kMaxDim>> stencil_offsets(int dim, int k);

struct EdgeTime {
  bool passable = false;
  double time = 0.0;
};

/// Traversal time of the straight segment a -> b at unit swim speed in the
/// flow sampled at the midpoint. With e the segment direction, V_par = <V,e>
/// and V_perp = V - V_par e: passable iff ||V_perp|| <= 1 and
/// s = V_par + sqrt(1 - ||V_perp||^2) > 0, taking time ||b-a|| / s.
/// Holding the line against a stronger cross-flow is not achievable, so
/// such edges are impassable rather than expensive.
EdgeTime edge_time(const VectorField& field, const VecN& a, const VecN& b);

/// Lattice graph over grid nodes with the stencil move set; edge weights are
/// computed lazily by edge_time.
struct StencilGraph {
  Grid grid;
  int radius;
  std::vector<std::array<std::int64_t, kMaxDim>> offsets;

  static StencilGraph make(const Grid& grid, int k);
};

/// Single-source shortest travel times over the stencil graph; unreachable
/// nodes hold +inf. An upper-bound discretization of the continuous travel
/// time over piecewise-straight paths. Priority ties break on the smaller
/// node index, so results are deterministic. k must be in [1, 4].
ScalarGridField dijkstra_times(const VectorField& field, const Grid& grid, const VecN& source,
                               int k);

}  // namespace flowreach

#endif  // FLOWREACH_ORACLE_HPP
