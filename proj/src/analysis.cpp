#include "flowreach/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flowreach {

using nlohmann::ordered_json;

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.subspan(0, half)) + pairwise_sum(xs.subspan(half));
}

ordered_json FluxReport::to_json() const {
  ordered_json j;
  j["surface"] = surface;
  j["flux"] = flux;
  j["area"] = area;
  j["density"] = density;
  j["quad_res"] = quad_res;
  j["vacuous"] = vacuous;
  if (density_p10) j["density_p10"] = *density_p10;
  if (density_p50) j["density_p50"] = *density_p50;
  if (faces_total > 0) {
    j["faces_total"] = faces_total;
    j["faces_trusted"] = faces_trusted;
  }
  return j;
}

FluxReport flux_cube_face(const VectorField& field, const CubeFace& face, int quad_res) {
  if (!(face.edge > 0.0)) throw std::invalid_argument("flux_cube_face: degenerate face");
  if (quad_res < 1) throw std::invalid_argument("flux_cube_face: quad_res must be >= 1");
  const int d = field.dim();

  std::int64_t total = 1;
  for (int a = 0; a < d - 1; ++a) total *= quad_res;
  const double dq = face.edge / quad_res;

  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(total));
  std::array<std::int64_t, kMaxDim> idx{};
  for (std::int64_t q = 0; q < total; ++q) {
    VecN x(d);
    x[face.axis] = face.coord;
    int t = 0;
    for (int a = 0; a < d; ++a) {
      if (a == face.axis) continue;
      x[a] = face.corner[a] + (static_cast<double>(idx[t]) + 0.5) * dq;
      ++t;
    }
    terms.push_back(field(x)[face.axis]);
    for (int a = d - 2; a >= 0; --a) {
      if (++idx[a] < quad_res) break;
      idx[a] = 0;
    }
  }

  FluxReport rep;
  rep.surface = "cube_face(axis=" + std::to_string(face.axis) + ",A=" + std::to_string(face.edge) + ")";
  rep.area = std::pow(face.edge, d - 1);
  const double cell_area = std::pow(dq, d - 1);
  rep.flux = face.orientation * pairwise_sum(terms) * cell_area;
  rep.density = rep.flux / rep.area;
  rep.quad_res = quad_res;
  return rep;
}

FluxReport closed_cube_flux(const VectorField& field, const VecN& corner, double edge,
                            int quad_res) {
  const int d = field.dim();
  FluxReport rep;
  rep.surface = "closed_cube(A=" + std::to_string(edge) + ")";
  rep.quad_res = quad_res;
  std::vector<double> face_fluxes;
  for (int a = 0; a < d; ++a) {
    for (int side = 0; side < 2; ++side) {
      CubeFace f;
      f.axis = a;
      f.corner = corner;
      f.edge = edge;
      f.coord = side == 0 ? corner[a] : corner[a] + edge;
      f.orientation = side == 0 ? -1.0 : 1.0;  // outward
      face_fluxes.push_back(flux_cube_face(field, f, quad_res).flux);
    }
  }
  rep.flux = pairwise_sum(face_fluxes);
  rep.area = 2.0 * d * std::pow(edge, d - 1);
  rep.density = rep.flux / rep.area;
  return rep;
}

FluxReport boundary_flux_check(const VectorField& field, const GridMask& mask,
                               double trusted_band, int patch_cells) {
  const Grid& g = mask.grid;
  const int d = g.dim();
  const std::int64_t on = mask.count();
  if (on == 0 || on == g.total_nodes())
    throw std::invalid_argument("boundary_flux_check: mask must have a nonempty boundary");
  if (patch_cells < 1) throw std::invalid_argument("boundary_flux_check: patch_cells must be >= 1");

  const std::vector<BoundaryFace> faces = boundary_faces(mask);
  const std::vector<std::uint8_t> trusted = trusted_nodes(g, trusted_band);
  const double face_area = std::pow(g.spacing(), d - 1);

  // Aggregate trusted faces over a patch lattice keyed by the inside node.
  struct Patch {
    double flux = 0.0;
    VecN vec_area;
    std::int64_t n_faces = 0;
  };
  std::map<std::int64_t, Patch> patches;
  std::vector<double> flux_terms;
  flux_terms.reserve(faces.size());
  std::array<std::int64_t, kMaxDim> idx{};
  std::int64_t n_trusted = 0;
  for (const auto& f : faces) {
    const double density = f.normal_sign * field(f.center(g))[f.axis];
    flux_terms.push_back(density * face_area);
    if (!trusted[static_cast<std::size_t>(f.inside_node)] ||
        !trusted[static_cast<std::size_t>(f.outside_node)])
      continue;
    ++n_trusted;
    g.unflat(f.inside_node, std::span<std::int64_t>(idx.data(), d));
    std::int64_t key = 0;
    for (int a = 0; a < d; ++a) key = key * 4096 + idx[a] / patch_cells;
    Patch& p = patches[key];
    if (p.n_faces == 0) p.vec_area = VecN(d);
    p.flux += density * face_area;
    p.vec_area[f.axis] += f.normal_sign * face_area;
    ++p.n_faces;
  }

  FluxReport rep;
  rep.surface = "reachable_boundary";
  rep.flux = pairwise_sum(flux_terms);
  rep.area = static_cast<double>(faces.size()) * face_area;
  rep.density = rep.flux / rep.area;
  rep.quad_res = patch_cells;
  rep.faces_total = static_cast<std::int64_t>(faces.size());
  rep.faces_trusted = n_trusted;

  double sup = field.sup_bound() ? *field.sup_bound()
                                 : sup_norm_estimate(field, g.box(), 4096);
  rep.vacuous = sup < 1.0;

  std::vector<double> patch_densities;
  for (const auto& [key, p] : patches) {
    if (p.n_faces < 8) continue;  // corner slivers carry no stable normal
    const double area = p.vec_area.norm();
    if (area > 1e-12) patch_densities.push_back(p.flux / area);
  }
  if (!patch_densities.empty()) {
    std::sort(patch_densities.begin(), patch_densities.end());
    auto quantile = [&](double q) {
      const auto i = static_cast<std::size_t>(q * static_cast<double>(patch_densities.size() - 1));
      return patch_densities[i];
    };
    rep.density_p10 = quantile(0.10);
    rep.density_p50 = quantile(0.50);
  }
  return rep;
}

ordered_json TravelTimeFit::to_json() const {
  ordered_json j;
  j["c1"] = c1;
  j["c2"] = c2;
  j["max_residual"] = max_residual;
  j["samples"] = static_cast<std::int64_t>(samples.size());
  return j;
}

UnreachablePairError::UnreachablePairError(const PairSample& p, std::size_t i)
    : std::runtime_error("travel time is infinite for sampled pair " + std::to_string(i)),
      pair(p),
      index(i) {}

TravelTimeFit fit_travel_times(std::vector<PairSample> samples) {
  if (samples.size() < 30)
    throw std::invalid_argument("fit_travel_times: need at least 30 pairs");
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!(samples[i].tau < kInf)) throw UnreachablePairError(samples[i], i);

  struct Pt {
    double d, tau;
  };
  std::vector<Pt> pts;
  pts.reserve(samples.size());
  for (const auto& s : samples) pts.push_back({(s.x - s.y).norm(), s.tau});
  std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) {
    return a.d < b.d || (a.d == b.d && a.tau < b.tau);
  });
  // Collapse duplicate separations to their largest tau.
  std::vector<Pt> uniq;
  for (const auto& p : pts) {
    if (!uniq.empty() && uniq.back().d == p.d) uniq.back().tau = std::max(uniq.back().tau, p.tau);
    else uniq.push_back(p);
  }
  const double span = uniq.back().d - uniq.front().d;
  if (!(span > 0.0))
    throw std::invalid_argument("fit_travel_times: pairs must span a range of separations");

  // Upper convex hull, left to right (monotone chain).
  std::vector<Pt> hull;
  for (const auto& p : uniq) {
    while (hull.size() >= 2) {
      const Pt& a = hull[hull.size() - 2];
      const Pt& b = hull[hull.size() - 1];
      if ((b.d - a.d) * (p.tau - a.tau) - (p.d - a.d) * (b.tau - a.tau) >= 0.0) hull.pop_back();
      else break;
    }
    hull.push_back(p);
  }

  // Hull edge slopes decrease left to right; take the flattest edge that is
  // wide enough to be noise-robust.
  double c1 = 0.0;
  bool found = false;
  for (std::size_t i = hull.size(); i-- > 1;) {
    const double dd = hull[i].d - hull[i - 1].d;
    if (dd >= 0.1 * span) {
      c1 = (hull[i].tau - hull[i - 1].tau) / dd;
      found = true;
      break;
    }
  }
  if (!found) c1 = (hull.back().tau - hull.front().tau) / span;  // hull chord
  c1 = std::max(0.0, c1);

  double need = -kInf;
  for (const auto& p : uniq) need = std::max(need, p.tau - c1 * p.d);
  const double c2 = std::max(0.0, need);

  TravelTimeFit fit;
  fit.samples = std::move(samples);
  fit.c1 = c1;
  fit.c2 = c2;
  double max_res = 0.0;
  for (const auto& s : fit.samples)
    max_res = std::max(max_res, c1 * (s.x - s.y).norm() + c2 - s.tau);
  fit.max_residual = max_res;
  return fit;
}

ordered_json TrapResult::to_json(const Grid& grid) const {
  ordered_json j;
  j["pass"] = pass;
  j["inside_has_finite"] = inside_has_finite;
  j["escapes"] = escapes;
  j["outside_nodes"] = outside_nodes;
  if (witness_node >= 0) {
    const VecN w = grid.position(witness_node);
    ordered_json wj = ordered_json::array();
    for (int a = 0; a < grid.dim(); ++a) wj.push_back(w[a]);
    j["witness"] = wj;
  }
  return j;
}

TrapResult trapping_check(const ScalarGridField& arrival, const TrapRegion& region) {
  const Grid& g = arrival.grid();
  TrapResult res;
  for (std::int64_t i = 0; i < g.total_nodes(); ++i) {
    const bool inside = region.contains(g.position(i));
    const bool finite = arrival[i] < kInf;
    if (inside) {
      res.inside_has_finite = res.inside_has_finite || finite;
    } else {
      ++res.outside_nodes;
      if (finite) {
        ++res.escapes;
        if (res.witness_node < 0) res.witness_node = i;
      }
    }
  }
  if (res.outside_nodes == 0)
    throw std::invalid_argument("trapping_check: region contains the whole grid");
  res.pass = res.inside_has_finite && res.escapes == 0;
  return res;
}

}  // namespace flowreach
