#include "flowreach/flowfield.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flowreach/parallel.hpp"
#include "flowreach/rng.hpp"

namespace flowreach {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json FieldDescriptor::to_json() const {
  ordered_json j;
  j["name"] = name;
  j["params"] = params;
  j["dimension"] = dimension;
  return j;
}

namespace {

VecN vec_from_json(const json& j) {
  if (!j.is_array() || j.size() < 2 || j.size() > kMaxDim)
    throw std::invalid_argument("expected an array of 2..8 numbers");
  VecN v(static_cast<int>(j.size()));
  for (int i = 0; i < v.dim(); ++i) v[i] = j.at(i).get<double>();
  return v;
}

json vec_to_json(const VecN& v) {
  json j = json::array();
  for (int i = 0; i < v.dim(); ++i) j.push_back(v[i]);
  return j;
}

double require_positive(const json& params, const char* key) {
  if (!params.contains(key)) throw std::invalid_argument(std::string("missing parameter: ") + key);
  double v = params.at(key).get<double>();
  if (!(v > 0.0)) throw std::invalid_argument(std::string("parameter must be positive: ") + key);
  return v;
}

// Half-mass integral of the standard bump kernel exp(-1/(1-u^2)) on [0, u],
// normalized so the table ends at 1. The mollified sign is the odd
// reflection, which keeps s(-t) == -s(t) bit-exact.
const std::vector<double>& bump_half_table() {
  static const std::vector<double> table = [] {
    constexpr int kFine = 1 << 15;  // integration grid on [0, 1]
    constexpr int kTab = 2049;
    auto bump = [](double u) {
      double w = 1.0 - u * u;
      return w > 0.0 ? std::exp(-1.0 / w) : 0.0;
    };
    std::vector<double> fine(kFine + 1, 0.0);
    double acc = 0.0;
    const double du = 1.0 / kFine;
    for (int i = 1; i <= kFine; ++i) {
      const double a = (i - 1) * du;
      const double b = i * du;
      acc += du / 6.0 * (bump(a) + 4.0 * bump(0.5 * (a + b)) + bump(b));
      fine[i] = acc;
    }
    std::vector<double> tab(kTab);
    for (int i = 0; i < kTab; ++i) {
      const double u = static_cast<double>(i) * kFine / (kTab - 1);
      const auto k = std::min<int>(static_cast<int>(u), kFine - 1);
      const double f = u - k;
      tab[i] = ((1.0 - f) * fine[k] + f * fine[k + 1]) / acc;
    }
    tab.front() = 0.0;
    tab.back() = 1.0;
    return tab;
  }();
  return table;
}

// Odd: fraction of the bump mass between -|u| and |u|, signed.
double bump_signed_mass(double u) {
  const double a = std::fabs(u);
  if (a >= 1.0) return u > 0.0 ? 1.0 : -1.0;
  const auto& tab = bump_half_table();
  const double pos = a * (tab.size() - 1);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(pos), tab.size() - 2);
  const double f = pos - static_cast<double>(k);
  const double m = (1.0 - f) * tab[k] + f * tab[k + 1];
  return u >= 0.0 ? m : -m;
}

VectorField make_constant(const json& params) {
  if (!params.contains("v")) throw std::invalid_argument("constant: missing parameter: v");
  const VecN v = vec_from_json(params.at("v"));
  FieldDescriptor desc{"constant", ordered_json{{"v", vec_to_json(v)}}, v.dim()};
  double comp = 0.0;
  for (int i = 0; i < v.dim(); ++i) comp = std::max(comp, std::fabs(v[i]));
  return VectorField(v.dim(), [v](const VecN&) { return v; }, std::move(desc))
      .with_sup_bound(v.norm())
      .with_component_sup_bound(comp)
      .with_feature_scale(kInf);
}

VectorField make_shear(const json& params) {
  const double amp = require_positive(params, "amplitude");
  if (!params.contains("wavevector")) throw std::invalid_argument("shear: missing parameter: wavevector");
  const VecN k = vec_from_json(params.at("wavevector"));
  const double kn = k.norm();
  if (!(kn > 0.0)) throw std::invalid_argument("shear: zero wavevector");

  // Unit direction orthogonal to k, so div V = -amp * sin(k.x) (k.u) = 0.
  VecN u(k.dim());
  if (k.dim() == 2) {
    u[0] = k[1] / kn;
    u[1] = -k[0] / kn;
  } else {
    int least = 0;
    for (int a = 1; a < k.dim(); ++a)
      if (std::fabs(k[a]) < std::fabs(k[least])) least = a;
    VecN e(k.dim());
    e[least] = 1.0;
    VecN proj = e - k * (k.dot(e) / (kn * kn));
    u = proj.normalized();
  }

  FieldDescriptor desc{"shear",
                       ordered_json{{"amplitude", amp}, {"wavevector", vec_to_json(k)}},
                       k.dim()};
  VecN period(k.dim());
  for (int a = 0; a < k.dim(); ++a) period[a] = k[a] != 0.0 ? 2.0 * M_PI / std::fabs(k[a]) : 0.0;
  double comp = 0.0;
  for (int a = 0; a < k.dim(); ++a) comp = std::max(comp, amp * std::fabs(u[a]));
  auto eval = [amp, k, u](const VecN& x) { return u * (amp * std::cos(k.dot(x))); };
  return VectorField(k.dim(), eval, std::move(desc))
      .with_sup_bound(amp)
      .with_component_sup_bound(comp)
      .with_period(period)
      .with_feature_scale(1.0 / kn);
}

VectorField make_cellular(const json& params) {
  const double amp = require_positive(params, "amplitude");
  const double cell = require_positive(params, "cell");
  const double k = M_PI / cell;
  FieldDescriptor desc{"cellular", ordered_json{{"amplitude", amp}, {"cell", cell}}, 2};
  // Stream function (amp/k) sin(kx) sin(ky): vortex cells of size `cell`,
  // stagnation points at cell centers and corners.
  auto eval = [amp, k](const VecN& x) {
    VecN v(2);
    v[0] = amp * std::sin(k * x[0]) * std::cos(k * x[1]);
    v[1] = -amp * std::cos(k * x[0]) * std::sin(k * x[1]);
    return v;
  };
  VecN period{2.0 * cell, 2.0 * cell};
  return VectorField(2, eval, std::move(desc))
      .with_sup_bound(amp)
      .with_component_sup_bound(amp)
      .with_period(period)
      .with_feature_scale(cell);
}

VectorField make_mollified_sign(const json& params) {
  const double amp = require_positive(params, "amplitude");
  const double rho = require_positive(params, "rho");
  FieldDescriptor desc{"mollified_sign", ordered_json{{"amplitude", amp}, {"rho", rho}}, 2};
  // Each component depends only on the other coordinate, so div V = 0 even
  // after mollification.
  auto eval = [amp, rho](const VecN& x) {
    VecN v(2);
    v[0] = amp * mollified_sign_profile(x[1], rho);
    v[1] = amp * mollified_sign_profile(x[0], rho);
    return v;
  };
  return VectorField(2, eval, std::move(desc))
      .with_sup_bound(amp * std::sqrt(2.0))
      .with_component_sup_bound(amp)
      .with_feature_scale(rho);
}

VectorField make_stream_random(const json& params) {
  const double amp = require_positive(params, "amplitude");
  if (!params.contains("modes")) throw std::invalid_argument("stream_random: missing parameter: modes");
  const int modes = params.at("modes").get<int>();
  if (modes < 1) throw std::invalid_argument("stream_random: modes must be >= 1");
  const auto seed = params.contains("seed") ? params.at("seed").get<std::uint64_t>() : 0ULL;

  // Wavevectors pi*(i,j) with (i,j) in {-1,0,1}^2 \ {0}: every mode has
  // per-axis period 2 and modest curvature, so finite-difference divergence
  // residuals stay tiny. Velocity of each mode is orthogonal to its
  // wavevector (stream-function construction).
  struct Mode {
    double kx, ky, phase, cx, cy;
  };
  std::vector<Mode> mode_list;
  SplitMix64 rng(seed);
  const int lattice[8][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}, {-1, 0}, {0, -1}, {-1, -1}, {-1, 1}};
  const double weight = amp / modes;
  for (int m = 0; m < modes; ++m) {
    const auto& iv = lattice[rng.next_below(8)];
    const double kx = M_PI * iv[0];
    const double ky = M_PI * iv[1];
    const double kn = std::sqrt(kx * kx + ky * ky);
    mode_list.push_back({kx, ky, rng.next_in(0.0, 2.0 * M_PI), weight * ky / kn, -weight * kx / kn});
  }

  FieldDescriptor desc{
      "stream_random",
      ordered_json{{"seed", seed}, {"modes", modes}, {"amplitude", amp}},
      2};
  auto eval = [mode_list](const VecN& x) {
    VecN v(2);
    for (const auto& m : mode_list) {
      const double c = std::cos(m.kx * x[0] + m.ky * x[1] + m.phase);
      v[0] += c * m.cx;
      v[1] += c * m.cy;
    }
    return v;
  };
  VecN period{2.0, 2.0};
  return VectorField(2, eval, std::move(desc))
      .with_sup_bound(amp)
      .with_component_sup_bound(amp)
      .with_period(period)
      .with_feature_scale(1.0 / (M_PI * std::sqrt(2.0)));
}

}  // namespace

double mollified_sign_profile(double t, double rho) {
  if (t >= rho) return 1.0;
  if (t <= -rho) return -1.0;
  return bump_signed_mass(t / rho);
}

VectorField make_builtin(const std::string& name, const json& params) {
  if (name == "constant") return make_constant(params);
  if (name == "shear") return make_shear(params);
  if (name == "cellular") return make_cellular(params);
  if (name == "mollified_sign") return make_mollified_sign(params);
  if (name == "stream_random") return make_stream_random(params);
  throw std::invalid_argument("unknown builtin field: " + name);
}

VectorField field_from_descriptor(const json& descriptor) {
  const std::string name = descriptor.at("name").get<std::string>();
  const json params = descriptor.contains("params") ? descriptor.at("params") : json::object();
  if (name == "translated") {
    VectorField base = field_from_descriptor(params.at("base"));
    return translate(base, vec_from_json(params.at("offset")));
  }
  VectorField f = make_builtin(name, params);
  if (descriptor.contains("dimension") && descriptor.at("dimension").get<int>() != f.dim())
    throw std::invalid_argument("field descriptor: dimension does not match builtin " + name);
  return f;
}

VectorField translate(const VectorField& field, const VecN& offset) {
  ordered_json params;
  params["offset"] = vec_to_json(offset);
  params["base"] = field.descriptor().to_json();
  FieldDescriptor desc{"translated", params, field.dim()};
  VectorField base = field;
  VectorField out(field.dim(),
                  [base, offset](const VecN& x) { return base(x - offset); }, std::move(desc));
  if (field.sup_bound()) out.with_sup_bound(*field.sup_bound());
  if (field.component_sup_bound()) out.with_component_sup_bound(*field.component_sup_bound());
  if (field.period()) out.with_period(*field.period());
  out.with_feature_scale(field.feature_scale());
  return out;
}

double divergence_residual(const VectorField& field, const Grid& grid, double fd_step) {
  if (!(fd_step > 0.0)) throw std::invalid_argument("divergence_residual: fd_step must be positive");
  const int d = grid.dim();
  const std::int64_t n = grid.total_nodes();
  std::vector<double> partial(static_cast<std::size_t>(thread_count()), 0.0);

  parallel_for(n, [&](std::int64_t b, std::int64_t e, int w) {
    const auto slot = static_cast<std::size_t>(w);
    double best = 0.0;
    for (std::int64_t i = b; i < e; ++i) {
      const VecN x = grid.position(i);
      double div = 0.0;
      for (int a = 0; a < d; ++a) {
        VecN xp = x, xm = x;
        xp[a] += fd_step;
        xm[a] -= fd_step;
        div += (field(xp)[a] - field(xm)[a]) / (2.0 * fd_step);
      }
      best = std::max(best, std::fabs(div));
    }
    partial[slot] = std::max(partial[slot], best);
  });
  double out = 0.0;
  for (double p : partial) out = std::max(out, p);
  return out;
}

double sup_norm_estimate(const VectorField& field, const Box& region, std::int64_t n_samples) {
  if (n_samples < 1) throw std::invalid_argument("sup_norm_estimate: n_samples must be >= 1");
  std::vector<double> partial(static_cast<std::size_t>(thread_count()), 0.0);
  parallel_for(n_samples, [&](std::int64_t b, std::int64_t e, int w) {
    const auto slot = static_cast<std::size_t>(w);
    double best = 0.0;
    for (std::int64_t i = b; i < e; ++i)
      best = std::max(best, field(halton_point(static_cast<std::uint64_t>(i), region)).norm());
    partial[slot] = std::max(partial[slot], best);
  });
  double out = 0.0;
  for (double p : partial) out = std::max(out, p);
  return out;
}

std::vector<VecN> CenterLattice::centers() const {
  const int d = lo.dim();
  std::array<std::int64_t, kMaxDim> counts{};
  std::int64_t total = 1;
  for (int a = 0; a < d; ++a) {
    counts[a] = static_cast<std::int64_t>(std::floor((hi[a] - lo[a]) / step + 1e-9)) + 1;
    if (counts[a] < 1) counts[a] = 1;
    total *= counts[a];
  }
  std::vector<VecN> out;
  out.reserve(static_cast<std::size_t>(total));
  std::array<std::int64_t, kMaxDim> idx{};
  for (std::int64_t i = 0; i < total; ++i) {
    VecN c(d);
    for (int a = 0; a < d; ++a) c[a] = lo[a] + step * static_cast<double>(idx[a]);
    out.push_back(c);
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[a] < counts[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

ordered_json DriftProfile::to_json() const {
  ordered_json j;
  j["entries"] = ordered_json::array();
  for (const auto& e : entries)
    j["entries"].push_back(ordered_json{{"L", e.edge_length}, {"drift", e.drift}});
  j["lattice"] = ordered_json{
      {"lo", vec_to_json(lattice.lo)}, {"hi", vec_to_json(lattice.hi)}, {"step", lattice.step}};
  j["quad_res"] = quad_res;
  j["underresolved"] = underresolved;
  return j;
}

DriftProfile mean_drift_profile(const VectorField& field, std::span<const double> edge_lengths,
                                const CenterLattice& lattice, int quad_res) {
  if (quad_res < 8)
    throw std::invalid_argument("mean_drift_profile: quad_res must be >= 8 points per unit length");
  for (std::size_t i = 0; i < edge_lengths.size(); ++i) {
    if (!(edge_lengths[i] > 0.0))
      throw std::invalid_argument("mean_drift_profile: edge lengths must be positive");
    if (i > 0 && edge_lengths[i] <= edge_lengths[i - 1])
      throw std::invalid_argument("mean_drift_profile: edge lengths must be sorted ascending");
  }

  const int d = field.dim();
  DriftProfile profile;
  profile.lattice = lattice;
  profile.quad_res = quad_res;

  const std::vector<VecN> centers = lattice.centers();
  for (double L : edge_lengths) {
    const auto npts = static_cast<std::int64_t>(std::ceil(quad_res * L - 1e-9));
    const double dq = L / static_cast<double>(npts);
    if (dq > field.feature_scale() / 4.0) profile.underresolved = true;

    std::int64_t total = 1;
    for (int a = 0; a < d; ++a) total *= npts;

    std::vector<double> partial(static_cast<std::size_t>(thread_count()), 0.0);
    const std::int64_t nc = static_cast<std::int64_t>(centers.size());
    parallel_for(nc, [&](std::int64_t b, std::int64_t e, int w) {
      const auto slot = static_cast<std::size_t>(w);
      double best = partial[slot];
      std::array<std::int64_t, kMaxDim> idx{};
      for (std::int64_t ci = b; ci < e; ++ci) {
        const VecN& c = centers[static_cast<std::size_t>(ci)];
        VecN sum(d);
        idx.fill(0);
        for (std::int64_t q = 0; q < total; ++q) {
          VecN x(d);
          for (int a = 0; a < d; ++a)
            x[a] = c[a] - 0.5 * L + (static_cast<double>(idx[a]) + 0.5) * dq;
          sum += field(x);
          for (int a = d - 1; a >= 0; --a) {
            if (++idx[a] < npts) break;
            idx[a] = 0;
          }
        }
        best = std::max(best, (sum * (1.0 / static_cast<double>(total))).norm());
      }
      partial[slot] = best;
    });
    double drift = 0.0;
    for (double p : partial) drift = std::max(drift, p);
    profile.entries.push_back({L, drift});
  }
  return profile;
}

}  // namespace flowreach
