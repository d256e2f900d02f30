#ifndef FLOWREACH_LEVELSET_HPP
#define FLOWREACH_LEVELSET_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "flowreach/flowfield.hpp"
#include "flowreach/grid.hpp"
#include "flowreach/vec.hpp"

namespace flowreach {

struct ArrivalParams {
  double horizon = 0.0;
  double cfl = 0.4;             ///< in (0, 0.5]
  double clamp_band_cells = 3;  ///< |phi| is clamped to this many cells
};

struct ArrivalStats {
  std::int64_t steps = 0;
  double dt = 0.0;
  double stop_time = 0.0;
  std::int64_t finite_nodes = 0;
  bool all_reached = false;
  bool stationary = false;  ///< front froze before the horizon
  double speed_bound = 0.0;  ///< max_i sup |V_i| used for the time step
};

/// Arrival-time field T(y) for a unit-speed agent in the flow, from a source
/// ball of radius 2h. Evolves phi_t + V.grad(phi) + |grad(phi)| = 0 from
/// phi_0(y) = ||y - x|| - 2h, so the front expands with outward normal speed
/// V.n + 1; each node's arrival is the first time phi <= 0, interpolated
/// linearly between the bracketing steps. Nodes not reached by the horizon
/// hold +inf. Advection is first-order upwind; the |grad(phi)| term uses the
/// Godunov (Rouy-Tourin) upwind flux; dt = cfl * h / (max_i sup|V_i| + 1).
///
/// The grid box is a hard wall (one-sided differences at the faces); values
/// within 4h of the box are untrusted, see trusted_nodes().
ScalarGridField solve_arrival(const VectorField& field, const Grid& grid, const VecN& source,
                              const ArrivalParams& params, ArrivalStats* stats = nullptr);

/// Nodes with arrival < tau. Masks are nested in tau.
GridMask reachable_mask(const ScalarGridField& arrival, double tau);

/// A dual-cell face separating a masked node from an unmasked neighbor.
/// The co-orientation is the normal pointing into the masked (reachable)
/// region; face area is h^(d-1).
struct BoundaryFace {
  std::int64_t inside_node = 0;
  std::int64_t outside_node = 0;
  int axis = 0;
  double normal_sign = 0.0;  ///< inward normal = normal_sign * e_axis

  VecN center(const Grid& grid) const {
    return (grid.position(inside_node) + grid.position(outside_node)) * 0.5;
  }
};

/// All faces between true and false nodes, in lexicographic node order.
/// Throws if the mask has no true node.
std::vector<BoundaryFace> boundary_faces(const GridMask& mask);

/// Gradient of the arrival field at a node: central differences, one-sided
/// next to +inf neighbors. Empty when no finite neighbor exists along some
/// axis (or the node itself is +inf).
std::optional<VecN> arrival_gradient(const ScalarGridField& arrival, std::int64_t node);

}  // namespace flowreach

#endif  // FLOWREACH_LEVELSET_HPP
