#include "flowreach/harness.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "flowreach/rng.hpp"

namespace flowreach {

Theorem1Result verify_theorem1(const VectorField& field, const Grid& grid, const VecN& source,
                               const ArrivalParams& params) {
  Theorem1Result res;
  const ScalarGridField arrival = solve_arrival(field, grid, source, params, &res.stats);
  const auto trusted = trusted_nodes(grid, kTrustedBandCells * grid.spacing());
  for (std::int64_t i = 0; i < grid.total_nodes(); ++i) {
    if (!trusted[static_cast<std::size_t>(i)]) continue;
    ++res.trusted_total;
    if (arrival[i] == kInf) {
      ++res.trusted_infinite;
      if (res.witness_node < 0) res.witness_node = i;
    }
  }
  res.pass = res.trusted_infinite == 0;
  return res;
}

std::vector<SourceTargets> sample_travel_pairs(const Grid& grid, std::uint64_t seed, int sources,
                                               int per_source) {
  const int d = grid.dim();
  const double h = grid.spacing();
  Box inner = grid.box();
  double min_extent = kInf;
  for (int a = 0; a < d; ++a) min_extent = std::min(min_extent, inner.extent(a));
  const double margin = std::max(5.0 * h, 0.05 * min_extent);
  for (int a = 0; a < d; ++a) {
    inner.lo[a] += margin;
    inner.hi[a] -= margin;
  }

  SplitMix64 rng(seed);
  auto snapped = [&](const VecN& p) { return grid.position(grid.nearest_node(p)); };

  std::vector<SourceTargets> out;
  std::set<std::int64_t> used_sources;
  for (int s = 0; s < sources; ++s) {
    VecN src;
    for (int tries = 0;; ++tries) {
      src = snapped(rng.next_point(inner));
      if (used_sources.insert(grid.nearest_node(src)).second) break;
      if (tries > 1000) throw std::runtime_error("sample_travel_pairs: could not place sources");
    }
    SourceTargets st;
    st.source = src;

    auto push_target = [&](const VecN& t) {
      const VecN q = snapped(t);
      if ((q - src).norm() >= 2.0 * h - 1e-12 && inner.contains(q)) {
        st.targets.push_back(q);
        return true;
      }
      return false;
    };

    // One near and one far target pin down the separation range.
    for (int tries = 0; tries < 1000; ++tries) {
      VecN dir(d);
      for (int a = 0; a < d; ++a) dir[a] = rng.next_in(-1.0, 1.0);
      if (dir.norm() < 1e-3) continue;
      if (push_target(src + dir.normalized() * (3.0 * h))) break;
    }
    for (int tries = 0; tries < 1000; ++tries) {
      const VecN p = rng.next_point(inner);
      if ((p - src).norm() >= 0.4 * min_extent && push_target(p)) break;
    }
    while (static_cast<int>(st.targets.size()) < per_source) {
      for (int tries = 0;; ++tries) {
        if (push_target(rng.next_point(inner))) break;
        if (tries > 10000) throw std::runtime_error("sample_travel_pairs: could not place targets");
      }
    }
    out.push_back(std::move(st));
  }
  return out;
}

Theorem2Result verify_theorem2(const VectorField& field, const Grid& grid,
                               const ArrivalParams& params, std::uint64_t seed, int sources,
                               int per_source) {
  const auto sample = sample_travel_pairs(grid, seed, sources, per_source);
  Theorem2Result res;
  std::vector<PairSample> pairs;
  for (const auto& st : sample) {
    ArrivalStats stats;
    const ScalarGridField arrival = solve_arrival(field, grid, st.source, params, &stats);
    res.stats.push_back(stats);
    for (const auto& t : st.targets)
      pairs.push_back({st.source, t, arrival[grid.nearest_node(t)]});
  }
  res.fit = fit_travel_times(std::move(pairs));
  return res;
}

AgreementResult agreement_ratio(const ScalarGridField& a, const ScalarGridField& b,
                                double trusted_band, const VecN& source, double exclude_radius) {
  const Grid& g = a.grid();
  if (g.total_nodes() != b.grid().total_nodes())
    throw std::invalid_argument("agreement_ratio: grids differ");
  const auto trusted = trusted_nodes(g, trusted_band);
  AgreementResult res;
  for (std::int64_t i = 0; i < g.total_nodes(); ++i) {
    if (!trusted[static_cast<std::size_t>(i)]) continue;
    if (a[i] == kInf || b[i] == kInf) continue;
    if ((g.position(i) - source).norm() <= exclude_radius) continue;
    ++res.compared;
    res.max_ratio = std::max(res.max_ratio, std::fabs(a[i] - b[i]) / (b[i] + 1.0));
  }
  return res;
}

ClosedLoopResult closed_loop(const VectorField& field, const ScalarGridField& arrival,
                             const VecN& source, const VecN& target, double replay_dt) {
  const double h = arrival.grid().spacing();
  ExtractResult ext = extract_trajectory(field, arrival, source, target, 0.5 * h);
  const Trajectory replay =
      integrate(field, ext.path.x.front(), ext.control, ext.duration, replay_dt);
  ClosedLoopResult res{std::move(ext), replay_error(replay, target),
                       arrival[arrival.grid().nearest_node(target)]};
  return res;
}

Lemma31Result lemma31_check(const VectorField& field, std::span<const double> edge_lengths,
                            std::uint64_t seed, int quad_res) {
  const int d = field.dim();
  Lemma31Result res;
  constexpr int kAnchors = 8;
  for (double A : edge_lengths) {
    SplitMix64 rng(seed);  // same anchors per edge length
    double best = 0.0;
    for (int n = 0; n < kAnchors; ++n) {
      for (int axis = 0; axis < d; ++axis) {
        CubeFace f;
        f.axis = axis;
        f.edge = A;
        f.corner = VecN(d);
        for (int a = 0; a < d; ++a) f.corner[a] = rng.next_in(0.0, 2.0);
        f.coord = f.corner[axis];
        f.orientation = 1.0;
        const auto npts = std::max(1, static_cast<int>(std::lround(quad_res * A)));
        const FluxReport rep = flux_cube_face(field, f, npts);
        best = std::max(best, std::fabs(rep.density));
      }
    }
    res.edge_lengths.push_back(A);
    res.densities.push_back(best);
  }
  res.monotone = true;
  for (std::size_t i = 1; i < res.densities.size(); ++i)
    if (res.densities[i] > res.densities[i - 1]) res.monotone = false;
  return res;
}

Lemma24Result lemma24_check(const VectorField& field, const ScalarGridField& arrival, double tau,
                            double min_density) {
  const GridMask mask = reachable_mask(arrival, tau);
  const double band = kTrustedBandCells * arrival.grid().spacing();
  Lemma24Result res;
  res.report = boundary_flux_check(field, mask, band);
  if (res.report.vacuous) {
    res.pass = true;
  } else if (res.report.density_p10) {
    res.pass = *res.report.density_p10 >= min_density;
  } else {
    res.pass = false;  // no trusted faces to judge
  }
  return res;
}

}  // namespace flowreach
