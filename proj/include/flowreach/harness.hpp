#ifndef FLOWREACH_HARNESS_HPP
#define FLOWREACH_HARNESS_HPP

#include <cstdint>
#include <vector>

#include "flowreach/analysis.hpp"
#include "flowreach/dynamics.hpp"
#include "flowreach/extract.hpp"
#include "flowreach/flowfield.hpp"
#include "flowreach/grid.hpp"
#include "flowreach/levelset.hpp"
#include "flowreach/oracle.hpp"

namespace flowreach {

inline constexpr double kTrustedBandCells = 4.0;

struct Theorem1Result {
  bool pass = false;
  std::int64_t trusted_total = 0;
  std::int64_t trusted_infinite = 0;
  std::int64_t witness_node = -1;
  ArrivalStats stats;
};

/// All trusted nodes must have finite arrival from the source.
Theorem1Result verify_theorem1(const VectorField& field, const Grid& grid, const VecN& source,
                               const ArrivalParams& params);

/// One source with its snapped target nodes for travel-time sampling.
struct SourceTargets {
  VecN source;
  std::vector<VecN> targets;
};

/// Deterministic seeded sample: sources and per-source targets snapped to
/// grid nodes inside the trusted region. Each source gets one near target
/// (about 3h) and one far target (at least 40% of the smallest box extent)
/// so separations span the range the envelope fit needs.
std::vector<SourceTargets> sample_travel_pairs(const Grid& grid, std::uint64_t seed, int sources,
                                               int per_source);

struct Theorem2Result {
  TravelTimeFit fit;
  std::vector<ArrivalStats> stats;
};

/// Solves one arrival field per sampled source, reads travel times at the
/// target nodes, and fits the linear envelope. Propagates
/// UnreachablePairError when a sampled pair is unreachable.
Theorem2Result verify_theorem2(const VectorField& field, const Grid& grid,
                               const ArrivalParams& params, std::uint64_t seed, int sources,
                               int per_source);

/// max over trusted nodes finite in both fields of |a - b| / (b + 1),
/// plus how many nodes entered the comparison. Nodes inside the level-set
/// source ball (within exclude_radius of source) are skipped: arrival there
/// is 0 by construction, not a computed travel time.
struct AgreementResult {
  double max_ratio = 0.0;
  std::int64_t compared = 0;
};
AgreementResult agreement_ratio(const ScalarGridField& a, const ScalarGridField& b,
                                double trusted_band, const VecN& source, double exclude_radius);

struct ClosedLoopResult {
  ExtractResult extraction;
  ReplayError replay;
  double arrival_at_target = 0.0;
};

/// Extracts a control from the arrival field and replays it through the RK4
/// integrator: the loop closes if the replay lands near the target in about
/// the arrival time.
ClosedLoopResult closed_loop(const VectorField& field, const ScalarGridField& arrival,
                             const VecN& source, const VecN& target, double replay_dt);

struct Lemma31Result {
  std::vector<double> edge_lengths;
  std::vector<double> densities;  ///< max |flux|/A^(d-1) over seeded anchors
  bool monotone = false;
};

/// Flux density through axis-aligned faces of growing edge length; for each
/// length the density is maximized over seeded anchor positions,
/// approximating the sup over placements.
Lemma31Result lemma31_check(const VectorField& field, std::span<const double> edge_lengths,
                            std::uint64_t seed, int quad_res);

struct Lemma24Result {
  FluxReport report;
  bool pass = false;
};

/// Inward flux density over the reachable boundary at time tau; passes when
/// the 10th percentile over trusted faces reaches min_density (or the case
/// is vacuous: flow weaker than the control).
Lemma24Result lemma24_check(const VectorField& field, const ScalarGridField& arrival, double tau,
                            double min_density);

}  // namespace flowreach

#endif  // FLOWREACH_HARNESS_HPP
