#include "flowreach/extract.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace flowreach {

namespace {

std::string point_str(const VecN& x) {
  std::string s = "(";
  for (int a = 0; a < x.dim(); ++a) s += (a ? "," : "") + std::to_string(x[a]);
  return s + ")";
}

// Nodal gradient by central differences, one-sided next to +inf neighbors.
// A NaN component marks "undefined": both neighbors unreachable.
class ArrivalGradient {
 public:
  explicit ArrivalGradient(const ScalarGridField& arrival) : arr_(arrival) {
    const Grid& g = arrival.grid();
    const int d = g.dim();
    grad_.resize(static_cast<std::size_t>(d));
    for (auto& ga : grad_)
      ga.assign(static_cast<std::size_t>(g.total_nodes()), std::numeric_limits<double>::quiet_NaN());
    for (std::int64_t i = 0; i < g.total_nodes(); ++i) {
      const auto grad = arrival_gradient(arrival, i);
      if (!grad) continue;
      for (int a = 0; a < d; ++a)
        grad_[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] = (*grad)[a];
    }
  }

  /// Multilinear interpolation of the nodal gradient. Returns false when any
  /// needed node has an undefined component.
  bool interpolate(const VecN& x, VecN& out) const {
    const Grid& g = arr_.grid();
    const int d = g.dim();
    std::array<std::int64_t, kMaxDim> base{};
    std::array<double, kMaxDim> frac{};
    for (int a = 0; a < d; ++a) {
      double u = (x[a] - g.min()[a]) / g.spacing();
      auto i = static_cast<std::int64_t>(std::floor(u));
      i = std::clamp<std::int64_t>(i, 0, g.cells(a) - 1);
      base[a] = i;
      frac[a] = std::clamp(u - static_cast<double>(i), 0.0, 1.0);
    }
    out = VecN(d);
    const int corners = 1 << d;
    for (int c = 0; c < corners; ++c) {
      double w = 1.0;
      std::int64_t f = 0;
      for (int a = 0; a < d; ++a) {
        const int bit = (c >> a) & 1;
        w *= bit ? frac[a] : (1.0 - frac[a]);
        f += (base[a] + bit) * g.node_stride(a);
      }
      if (w == 0.0) continue;
      for (int a = 0; a < d; ++a) {
        const double ga = grad_[static_cast<std::size_t>(a)][static_cast<std::size_t>(f)];
        if (std::isnan(ga)) return false;
        out[a] += w * ga;
      }
    }
    return true;
  }

 private:
  const ScalarGridField& arr_;
  std::vector<std::vector<double>> grad_;
};

// Unit control maximizing the measured arrival-time descent of one backward
// probe step. Robust next to shocks, where the interpolated gradient can
// point along a slower characteristic.
bool probe_control(const VectorField& field, const ScalarGridField& arrival, const VecN& y,
                   double step, VecN& out) {
  const int d = y.dim();
  const double t_here = arrival.interpolate(y);
  if (!(t_here < kInf)) return false;
  double best = -kInf;
  bool found = false;
  const VecN v = field(y);
  if (d == 2) {
    constexpr int kRays = 32;
    for (int r = 0; r < kRays; ++r) {
      const double th = 2.0 * M_PI * r / kRays;
      VecN u{std::cos(th), std::sin(th)};
      const VecN w = v + u;
      const double dt = 0.5 * step / std::max(w.norm(), 1e-9);
      const double t_next = arrival.interpolate(y - w * dt);
      if (t_next == kInf) continue;
      const double rate = (t_here - t_next) / dt;
      if (rate > best) {
        best = rate;
        out = u;
        found = true;
      }
    }
  } else {
    // Low-discrepancy directions on the sphere via normalized lattice rays.
    for (int i = -2; i <= 2; ++i)
      for (int j = -2; j <= 2; ++j)
        for (int k = -2; k <= 2; ++k) {
          if (!i && !j && !k) continue;
          VecN u(d);
          u[0] = i;
          u[1] = j;
          u[2] = k;
          u = u.normalized();
          const VecN w = v + u;
          const double dt = 0.5 * step / std::max(w.norm(), 1e-9);
          const double t_next = arrival.interpolate(y - w * dt);
          if (t_next == kInf) continue;
          const double rate = (t_here - t_next) / dt;
          if (rate > best) {
            best = rate;
            out = u;
            found = true;
          }
        }
  }
  return found;
}

struct MarchResult {
  std::vector<double> s;
  std::vector<VecN> y;
  std::vector<VecN> dir;
  std::int64_t degraded = 0;
};

MarchResult march(const VectorField& field, const ScalarGridField& arrival,
                  const ArrivalGradient& gradient, const VecN& source, const VecN& target,
                  double step, double stop_radius, bool use_probe) {
  const Grid& g = arrival.grid();
  const int d = g.dim();
  const double h = g.spacing();

  MarchResult res;
  res.s.push_back(0.0);
  res.y.push_back(target);
  VecN y = target;
  VecN prev_dir(d);
  bool have_prev = false;
  const auto max_steps =
      static_cast<std::int64_t>(20.0 * (g.max() - g.min()).norm() / step) + 10000;
  VecN anchor = y;
  std::int64_t steps = 0;

  while ((y - source).norm() > stop_radius) {
    VecN dir(d);
    bool have_dir = false;
    if (use_probe) have_dir = probe_control(field, arrival, y, step, dir);
    if (!have_dir) {
      VecN grad(d);
      if (!gradient.interpolate(y, grad)) {
        if (use_probe && have_prev) {
          dir = prev_dir;
          ++res.degraded;
          have_dir = true;
        } else {
          throw std::runtime_error("extract_trajectory: arrival gradient undefined at " +
                                   point_str(y));
        }
      } else if (grad.norm() < 1e-12) {
        if (!have_prev)
          throw std::runtime_error("extract_trajectory: vanishing gradient at " + point_str(y));
        dir = prev_dir;
        ++res.degraded;
        have_dir = true;
      } else {
        dir = grad * (1.0 / grad.norm());
        have_dir = true;
      }
    }
    prev_dir = dir;
    have_prev = true;

    // Control frozen over the step; midpoint rule for the backward motion so
    // the forward RK4 replay of the same piecewise-constant control retraces
    // this path closely.
    const VecN w1 = field(y) + dir;
    const double speed = w1.norm();
    double ds = std::min(step / std::max(speed, 1e-9), 4.0 * step);
    // Along a true characteristic the arrival time falls one-for-one with
    // backward time; a step that badly breaks that hopped across a shock.
    const double t_here = arrival.interpolate(y);
    VecN y_next = y;
    for (int attempt = 0;; ++attempt) {
      const VecN w2 = field(y - w1 * (0.5 * ds)) + dir;
      y_next = y - w2 * ds;
      if (attempt >= 4) break;
      const double t_next = arrival.interpolate(y_next);
      if (t_next <= t_here - 0.25 * ds || (y_next - source).norm() <= stop_radius) break;
      ds *= 0.5;
    }
    y = y_next;
    ++steps;
    res.s.push_back(res.s.back() + ds);
    res.y.push_back(y);
    res.dir.push_back(dir);

    if (steps % 50 == 0) {
      if ((y - anchor).norm() < 1e-3 * h)
        throw std::runtime_error("extract_trajectory: descent stagnated near " + point_str(y) +
                                 " (non-smooth arrival field)");
      anchor = y;
    }
    if (steps > max_steps)
      throw std::runtime_error("extract_trajectory: step budget exhausted near " + point_str(y));
    if (g.margin(y) < 0.0)
      throw std::runtime_error("extract_trajectory: descent left the grid at " + point_str(y));
  }
  return res;
}

ExtractResult assemble(const MarchResult& m, double step) {
  const double duration = m.s.back();
  const std::size_t n = m.y.size();
  const int d = m.y.front().dim();

  std::vector<double> bp;
  std::vector<VecN> vals;
  if (n == 1) {
    bp.push_back(0.0);
    vals.push_back(VecN(d));
  } else {
    for (std::size_t j = n - 1; j-- > 0;) {
      // forward interval [duration - s[j+1], duration - s[j])
      double t0 = duration - m.s[j + 1];
      if (j == n - 2) t0 = 0.0;
      VecN a = m.dir[j];
      const double an = a.norm();
      if (an > 1.0) a = a * (1.0 / an);
      if (bp.empty() || t0 > bp.back()) {
        bp.push_back(t0);
        vals.push_back(a);
      }
    }
  }
  ControlSignal control(std::move(bp), std::move(vals), 1.0);

  Trajectory path{{}, {}, control, m.y.back(), step};
  path.t.reserve(n);
  path.x.reserve(n);
  for (std::size_t j = n; j-- > 0;) {
    path.t.push_back(duration - m.s[j]);
    path.x.push_back(m.y[j]);
  }

  return ExtractResult{std::move(path), std::move(control), duration,
                       n > 1 ? static_cast<double>(m.degraded) / static_cast<double>(n - 1) : 0.0};
}

}  // namespace

ExtractResult extract_trajectory(const VectorField& field, const ScalarGridField& arrival,
                                 const VecN& source, const VecN& target, double step) {
  const Grid& g = arrival.grid();
  const double h = g.spacing();
  if (!(step > 0.0)) throw std::invalid_argument("extract_trajectory: step must be positive");
  if (g.margin(target) < 4.0 * h)
    throw std::invalid_argument("extract_trajectory: target lies in the untrusted boundary band");
  const double arrival_at_target = arrival.interpolate(target);
  if (!(arrival_at_target < kInf))
    throw std::invalid_argument("extract_trajectory: target arrival time is not finite");

  const ArrivalGradient gradient(arrival);
  const double stop_radius = 3.0 * h;  // source ball (2h) plus one cell

  MarchResult m = march(field, arrival, gradient, source, target, step, stop_radius, false);
  if (m.s.back() > 1.02 * arrival_at_target + 3.0 * h) {
    // The gradient descent picked a slow characteristic (it happens next to
    // shocks); retry steering by measured descent and keep the faster path.
    try {
      MarchResult probed = march(field, arrival, gradient, source, target, step, stop_radius, true);
      if (probed.s.back() < m.s.back()) m = std::move(probed);
    } catch (const std::exception&) {
      // fall back to the gradient path
    }
  }
  return assemble(m, step);
}

}  // namespace flowreach
