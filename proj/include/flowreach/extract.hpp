#ifndef FLOWREACH_EXTRACT_HPP
#define FLOWREACH_EXTRACT_HPP

#include "flowreach/dynamics.hpp"
#include "flowreach/grid.hpp"
#include "flowreach/vec.hpp"

namespace flowreach {

struct ExtractResult {
  Trajectory path;           ///< forward path from near the source to the target
  ControlSignal control;     ///< forward unit control realizing the path
  double duration = 0.0;
  double clip_fraction = 0.0;  ///< fraction of steps with degraded gradients
};

/// Recovers a near-optimal control from the arrival field by integrating
/// ydot = -(V(y) + g(y)) backward from the target, where g is the normalized
/// gradient of the arrival time (the optimal control is the unit inward
/// front normal, the front's normal speed being V.n + 1). Stops on entering
/// the source ball of radius 3h, then reverses into a forward control with
/// ||alpha|| = 1. Gradients use central differences with one-sided fallback
/// next to +inf nodes.
///
/// step is the spatial step length (h/2 unless there is a reason not to).
/// Throws when arrival(target) is not finite, the target sits in the
/// untrusted boundary band, the gradient is undefined along the path, or the
/// descent stagnates (net motion < 1e-3 h over 50 steps).
ExtractResult extract_trajectory(const VectorField& field, const ScalarGridField& arrival,
                                 const VecN& source, const VecN& target, double step);

}  // namespace flowreach

#endif  // FLOWREACH_EXTRACT_HPP
