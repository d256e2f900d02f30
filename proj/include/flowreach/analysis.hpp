#ifndef FLOWREACH_ANALYSIS_HPP
#define FLOWREACH_ANALYSIS_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "flowreach/flowfield.hpp"
#include "flowreach/grid.hpp"
#include "flowreach/levelset.hpp"
#include "flowreach/vec.hpp"

namespace flowreach {

/// Axis-aligned (d-1)-cube: the set {x_axis = coord} x prod_{a != axis}
/// [corner_a, corner_a + edge], with unit normal orientation * e_axis.
struct CubeFace {
  int axis = 0;
  double coord = 0.0;
  VecN corner;  ///< entry `axis` is ignored
  double edge = 0.0;
  double orientation = 1.0;  ///< +1 or -1
};

/// Measured flux of V through a surface.
struct FluxReport {
  std::string surface;
  double flux = 0.0;
  double area = 0.0;
  double density = 0.0;  ///< flux / area
  int quad_res = 0;
  bool vacuous = false;  ///< flow too weak for the inward-flux prediction to bind
  // Per-face density statistics, present for reachable-boundary surfaces.
  std::optional<double> density_p10;
  std::optional<double> density_p50;
  std::int64_t faces_total = 0;
  std::int64_t faces_trusted = 0;

  nlohmann::ordered_json to_json() const;
};

/// Midpoint-rule surface integral of <V, n> over the face with
/// quad_res^(d-1) sample points. Throws on edge <= 0.
FluxReport flux_cube_face(const VectorField& field, const CubeFace& face, int quad_res);

/// Total flux through the boundary of the cube [corner, corner + edge]^d,
/// outward normals, summed over all 2d faces. Zero up to quadrature error
/// for divergence-free fields.
FluxReport closed_cube_flux(const VectorField& field, const VecN& corner, double edge,
                            int quad_res);

/// Inward flux density of V over the staircase boundary of a reachable mask.
/// Raw staircase normals of a diagonal boundary alternate between axes and
/// make single-face densities meaningless (a 45-degree wall in a diagonal
/// flow reads +-||V|| face by face), so faces are aggregated into patches of
/// `patch_cells` pitch: patch flux over patch vector-area converges to the
/// local <V, n>. Quantiles are over patches made of trusted faces (further
/// than trusted_band from the box) with at least 8 faces. Tagged vacuous
/// when the flow is weaker than the unit control (sup ||V|| < 1): the
/// boundary then moves by control alone and the inward-flux prediction does
/// not bind. Throws if the mask is all-true or all-false.
FluxReport boundary_flux_check(const VectorField& field, const GridMask& mask,
                               double trusted_band, int patch_cells = 32);

struct PairSample {
  VecN x;
  VecN y;
  double tau = 0.0;
};

/// Linear upper envelope tau <= C1 ||x-y|| + C2 over travel-time samples.
struct TravelTimeFit {
  std::vector<PairSample> samples;
  double c1 = 0.0;
  double c2 = 0.0;
  double max_residual = 0.0;  ///< max slack C1 d + C2 - tau over samples

  nlohmann::ordered_json to_json() const;
};

/// A sampled pair with infinite travel time, which voids the envelope fit.
class UnreachablePairError : public std::runtime_error {
 public:
  UnreachablePairError(const PairSample& pair, std::size_t index);
  PairSample pair;
  std::size_t index;
};

/// Fits the envelope: C1 is the slope of the flattest upper-convex-hull edge
/// spanning at least 10% of the separation range (slope through the extreme
/// point alone would be hostage to one noisy sample); C2 is then the smallest
/// intercept covering every sample, clamped at 0. Requires >= 30 samples,
/// all finite; throws UnreachablePairError on the first infinite tau.
TravelTimeFit fit_travel_times(std::vector<PairSample> samples);

/// Conjunction of per-axis lower bounds {x : x_axis >= min for each entry}.
struct TrapRegion {
  struct AxisBound {
    int axis = 0;
    double min = 0.0;
  };
  std::vector<AxisBound> bounds;

  bool contains(const VecN& x) const {
    for (const auto& b : bounds)
      if (x[b.axis] < b.min) return false;
    return true;
  }
};

struct TrapResult {
  bool pass = false;
  bool inside_has_finite = false;
  std::int64_t escapes = 0;             ///< finite-arrival nodes outside the region
  std::int64_t witness_node = -1;       ///< a finite node outside the region, if any
  std::int64_t outside_nodes = 0;

  nlohmann::ordered_json to_json(const Grid& grid) const;
};

/// Pass iff every node outside the region has arrival +inf and at least one
/// node inside is finite. Throws if the region contains the whole grid.
TrapResult trapping_check(const ScalarGridField& arrival, const TrapRegion& region);

/// Fixed-order pairwise summation; deterministic regardless of threading.
double pairwise_sum(std::span<const double> xs);

}  // namespace flowreach

#endif  // FLOWREACH_ANALYSIS_HPP
