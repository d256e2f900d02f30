#include "flowreach/levelset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>

#include "flowreach/parallel.hpp"

namespace flowreach {

namespace {

// Rate at which the held source ball drains below its initial values. Any
// positive rate keeps the well alive under strong flows; 1/2 leaves the
// mildest kink in the wake profile behind slow upstream fronts.
constexpr double kDrainRate = 0.5;

// Maximal runs of columns per row. Runs are conservative supersets of the
// set of nodes whose value may change next step; anything outside a run is
// provably a no-op for the update, so skipping it is bit-exact.
struct Runs {
  static constexpr int kCap = 8;
  int n = 0;
  std::array<std::pair<std::int32_t, std::int32_t>, kCap> r{};  // [lo, hi)

  void push(std::int32_t lo, std::int32_t hi) {
    if (n > 0 && lo <= r[n - 1].second) {
      r[n - 1].second = std::max(r[n - 1].second, hi);
      return;
    }
    if (n == kCap) {
      r[n - 1].second = std::max(r[n - 1].second, hi);
      return;
    }
    r[n++] = {lo, hi};
  }
  void clear() { n = 0; }
  bool empty() const { return n == 0; }
};

// Builds changed-column runs with a small merge gap so the per-row run count
// stays tiny.
struct RunBuilder {
  static constexpr std::int32_t kGap = 16;
  Runs* out;
  std::int32_t lo = -1, hi = -1;

  void mark(std::int32_t c) {
    if (lo < 0) {
      lo = c;
      hi = c + 1;
    } else if (c < hi + kGap) {
      hi = c + 1;
    } else {
      out->push(lo, hi);
      lo = c;
      hi = c + 1;
    }
  }
  void finish() {
    if (lo >= 0) out->push(lo, hi);
    lo = hi = -1;
  }
};

struct RowSpace {
  int d = 0;                // grid dimension
  int row_axes = 0;         // d - 1
  std::int64_t cols = 0;    // nodes along the last axis
  std::int64_t rows = 0;
  std::array<std::int64_t, kMaxDim> row_counts{};   // nodes per leading axis
  std::array<std::int64_t, kMaxDim> row_strides{};  // strides in row space

  explicit RowSpace(const Grid& g) {
    d = g.dim();
    row_axes = d - 1;
    cols = g.nodes(d - 1);
    rows = g.total_nodes() / cols;
    for (int a = 0; a < row_axes; ++a) {
      row_counts[a] = g.nodes(a);
      row_strides[a] = g.node_stride(a) / cols;
    }
  }
  void decode(std::int64_t row, std::span<std::int64_t> idx) const {
    for (int a = 0; a < row_axes; ++a) {
      idx[a] = row / row_strides[a];
      row -= idx[a] * row_strides[a];
    }
  }
};

struct StepResult {
  double max_delta = 0.0;
  std::int64_t newly_finite = 0;
};

class ArrivalStepper {
 public:
  ArrivalStepper(const VectorField& field, const Grid& grid, const VecN& source,
                 const ArrivalParams& params)
      : grid_(grid), rs_(grid), arrival_(grid, kInf) {
    const int d = grid.dim();
    h_ = grid.spacing();
    clamp_ = params.clamp_band_cells * h_;
    r0_ = 2.0 * h_;

    // Velocity at every node, one contiguous array per component.
    vel_.resize(static_cast<std::size_t>(d));
    for (auto& v : vel_) v.resize(static_cast<std::size_t>(grid.total_nodes()));
    parallel_for(grid.total_nodes(), [&](std::int64_t b, std::int64_t e, int) {
      for (std::int64_t i = b; i < e; ++i) {
        const VecN u = field(grid.position(i));
        for (int a = 0; a < d; ++a) vel_[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] = u[a];
      }
    });

    phi_in_.resize(static_cast<std::size_t>(grid.total_nodes()));
    parallel_for(grid.total_nodes(), [&](std::int64_t b, std::int64_t e, int) {
      for (std::int64_t i = b; i < e; ++i) {
        double p = (grid.position(i) - source).norm() - r0_;
        p = std::clamp(p, -clamp_, clamp_);
        phi_in_[static_cast<std::size_t>(i)] = p;
        if (p <= 0.0) arrival_[i] = 0.0;
      }
    });
    phi_out_ = phi_in_;
    for (std::int64_t i = 0; i < grid.total_nodes(); ++i) finite_ += (arrival_[i] == 0.0);

    // The source ball is held at phi_0 - t (down to the clamp floor). In the
    // continuum this changes nothing: the held branch's region of influence
    // is exactly the reachable set, so the zero level is identical. On the
    // grid it keeps the well alive when a strong flow (||V|| >> 1) would
    // otherwise flatten the thin source blob by numerical diffusion before
    // the swept trail can widen.
    for (std::int64_t i = 0; i < grid.total_nodes(); ++i) {
      const double p0 = (grid.position(i) - source).norm() - r0_;
      if (p0 <= 0.0) {
        const std::int64_t row = i / rs_.cols;
        const auto col = static_cast<std::int32_t>(i - row * rs_.cols);
        pump_rows_[row].push_back({col, p0});
      }
    }

    active_.assign(static_cast<std::size_t>(rs_.rows), Runs{});
    changed_.assign(static_cast<std::size_t>(rs_.rows), Runs{});
    next_active_.assign(static_cast<std::size_t>(rs_.rows), Runs{});
    for (auto& a : active_) a.push(0, static_cast<std::int32_t>(rs_.cols));
  }

  std::int64_t finite_count() const { return finite_; }
  const ScalarGridField& arrival() const { return arrival_; }
  ScalarGridField&& take_arrival() { return std::move(arrival_); }

  bool frozen() const { return frozen_; }

  StepResult step(double t, double dt) {
    const int nw = thread_count();
    std::vector<double> max_delta(static_cast<std::size_t>(nw), 0.0);
    std::vector<std::int64_t> newly(static_cast<std::size_t>(nw), 0);

    parallel_for(rs_.rows, [&](std::int64_t rb, std::int64_t re, int w) {
      double md = 0.0;
      std::int64_t nf = 0;
      for (std::int64_t r = rb; r < re; ++r) {
        changed_[static_cast<std::size_t>(r)].clear();
        const Runs& act = active_[static_cast<std::size_t>(r)];
        if (act.empty()) continue;
        RunBuilder rbld{&changed_[static_cast<std::size_t>(r)]};
        step_row(r, act, t, dt, md, nf, rbld);
        rbld.finish();
      }
      max_delta[static_cast<std::size_t>(w)] = md;
      newly[static_cast<std::size_t>(w)] = nf;
    });

    if (pump_active_) {
      bool all_floored = true;
      double pump_delta = 0.0;
      for (auto& [row, cols] : pump_rows_) {
        bool row_changed = false;
        for (const auto& [col, p0] : cols) {
          const std::int64_t i = row * rs_.cols + col;
          const double pv = std::max(p0 - kDrainRate * (t + dt), -clamp_);
          if (pv > -clamp_) all_floored = false;
          const double prev = phi_out_[static_cast<std::size_t>(i)];
          if (pv < prev) {
            phi_out_[static_cast<std::size_t>(i)] = pv;
            pump_delta = std::max(pump_delta, prev - pv);
            row_changed = true;
          }
          if (phi_out_[static_cast<std::size_t>(i)] != phi_in_[static_cast<std::size_t>(i)])
            row_changed = true;
        }
        if (row_changed) {
          // Fold the pump columns into this row's changed runs so the next
          // active set covers them.
          Runs merged;
          const Runs& ch = changed_[static_cast<std::size_t>(row)];
          int k = 0;
          std::size_t p = 0;
          while (k < ch.n || p < cols.size()) {
            std::int32_t lo, hi;
            if (p == cols.size() || (k < ch.n && ch.r[static_cast<std::size_t>(k)].first <= cols[p].first)) {
              lo = ch.r[static_cast<std::size_t>(k)].first;
              hi = ch.r[static_cast<std::size_t>(k)].second;
              ++k;
            } else {
              lo = cols[p].first;
              hi = lo + 1;
              ++p;
            }
            merged.push(lo, hi);
          }
          changed_[static_cast<std::size_t>(row)] = merged;
        }
      }
      if (all_floored) pump_active_ = false;
      max_delta[0] = std::max(max_delta[0], pump_delta);
    }

    // Next active set: dilation of the changed set by the stencil reach
    // (two nodes) in every direction.
    parallel_for(rs_.rows, [&](std::int64_t rb, std::int64_t re, int) {
      std::array<std::int64_t, kMaxDim> ridx{};
      // Up to (1 + 4*(d-1)) neighbor rows, Runs::kCap runs each.
      std::array<std::pair<std::int32_t, std::int32_t>, (4 * kMaxDim - 3) * Runs::kCap> buf{};
      for (std::int64_t r = rb; r < re; ++r) {
        rs_.decode(r, std::span<std::int64_t>(ridx.data(), rs_.row_axes));
        int nb = 0;
        auto collect = [&](std::int64_t rr) {
          const Runs& c = changed_[static_cast<std::size_t>(rr)];
          for (int k = 0; k < c.n; ++k) buf[static_cast<std::size_t>(nb++)] = c.r[static_cast<std::size_t>(k)];
        };
        collect(r);
        for (int a = 0; a < rs_.row_axes; ++a) {
          for (std::int64_t s = 1; s <= 2; ++s) {
            if (ridx[a] >= s) collect(r - s * rs_.row_strides[a]);
            if (ridx[a] + s < rs_.row_counts[a]) collect(r + s * rs_.row_strides[a]);
          }
        }
        Runs& na = next_active_[static_cast<std::size_t>(r)];
        na.clear();
        if (nb == 0) continue;
        std::sort(buf.begin(), buf.begin() + nb);
        for (int k = 0; k < nb; ++k) {
          const auto lo = std::max<std::int32_t>(0, buf[static_cast<std::size_t>(k)].first - 2);
          const auto hi =
              std::min<std::int32_t>(static_cast<std::int32_t>(rs_.cols), buf[static_cast<std::size_t>(k)].second + 2);
          na.push(lo, hi);
        }
      }
    });
    std::swap(active_, next_active_);
    std::swap(phi_in_, phi_out_);

    StepResult res;
    for (int w = 0; w < nw; ++w) {
      res.max_delta = std::max(res.max_delta, max_delta[static_cast<std::size_t>(w)]);
      res.newly_finite += newly[static_cast<std::size_t>(w)];
    }
    finite_ += res.newly_finite;
    frozen_ = true;
    for (const auto& a : active_)
      if (!a.empty()) {
        frozen_ = false;
        break;
      }
    return res;
  }

 private:
  template <int D>
  void step_row_impl(std::int64_t row, const Runs& act, double t, double dt, double& max_delta,
                     std::int64_t& newly_finite, RunBuilder& rbld, int runtime_d);
  void step_row(std::int64_t row, const Runs& act, double t, double dt, double& max_delta,
                std::int64_t& newly_finite, RunBuilder& rbld) {
    switch (grid_.dim()) {
      case 2: step_row_impl<2>(row, act, t, dt, max_delta, newly_finite, rbld, 2); break;
      case 3: step_row_impl<3>(row, act, t, dt, max_delta, newly_finite, rbld, 3); break;
      default: step_row_impl<0>(row, act, t, dt, max_delta, newly_finite, rbld, grid_.dim()); break;
    }
  }

  Grid grid_;
  RowSpace rs_;
  ScalarGridField arrival_;
  std::vector<std::vector<double>> vel_;
  std::vector<double> phi_in_, phi_out_;
  std::vector<Runs> active_, changed_, next_active_;
  std::map<std::int64_t, std::vector<std::pair<std::int32_t, double>>> pump_rows_;
  bool pump_active_ = true;
  double h_ = 0.0, clamp_ = 0.0, r0_ = 0.0;
  std::int64_t finite_ = 0;
  bool frozen_ = false;
};

template <int D>
void ArrivalStepper::step_row_impl(std::int64_t row, const Runs& act, double t, double dt,
                                   double& max_delta, std::int64_t& newly_finite, RunBuilder& rbld,
                                   int runtime_d) {
  const int d = D > 0 ? D : runtime_d;
  const double inv_h = 1.0 / h_;
  const std::int64_t cols = rs_.cols;
  const std::int64_t base = row * cols;

  std::array<std::int64_t, kMaxDim> ridx{};
  rs_.decode(row, std::span<std::int64_t>(ridx.data(), rs_.row_axes));
  // Per leading axis: stride in node space and distances to the walls.
  std::array<std::int64_t, kMaxDim> stride{};
  std::array<std::int64_t, kMaxDim> room_min{}, room_max{};
  for (int a = 0; a + 1 < d; ++a) {
    stride[a] = rs_.row_strides[a] * cols;
    room_min[a] = ridx[a];
    room_max[a] = rs_.row_counts[a] - 1 - ridx[a];
  }

  const double* in = phi_in_.data();
  double* out = phi_out_.data();

  auto minmod = [](double x, double y) {
    if (x > 0.0 && y > 0.0) return std::min(x, y);
    if (x < 0.0 && y < 0.0) return std::max(x, y);
    return 0.0;
  };

  for (int k = 0; k < act.n; ++k) {
    const std::int64_t lo = act.r[static_cast<std::size_t>(k)].first;
    const std::int64_t hi = act.r[static_cast<std::size_t>(k)].second;
    for (std::int64_t c = lo; c < hi; ++c) {
      const std::int64_t i = base + c;
      const double pc = in[i];

      double adv = 0.0;
      double grad2 = 0.0;

      for (int a = 0; a < d; ++a) {
        std::int64_t rm, rp, st;  // room to the walls, stride
        if (a + 1 == d) {
          rm = c;
          rp = cols - 1 - c;
          st = 1;
        } else {
          rm = room_min[a];
          rp = room_max[a];
          st = stride[a];
        }
        const double vm = rm > 0 ? in[i - st] : pc;
        const double vp = rp > 0 ? in[i + st] : pc;
        double m = (pc - vm) * inv_h;
        double p = (vp - pc) * inv_h;
        // One-sided differences at the box faces.
        if (rm == 0) m = p;
        if (rp == 0) p = m;

        const double v = vel_[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)];
        // Advection: second-order upwind with a minmod-limited correction
        // (first order at walls and extrema). Keeps thin swept regions from
        // being flattened by upwind diffusion when ||V|| >> 1.
        if (v > 0.0) {
          double slope = m;
          if (rm > 1) {
            const double mm = (vm - in[i - 2 * st]) * inv_h;
            slope += 0.5 * minmod(m - mm, p - m);
          }
          adv += v * slope;
        } else if (v < 0.0) {
          double slope = p;
          if (rp > 1) {
            const double ppx = (in[i + 2 * st] - vp) * inv_h;
            slope -= 0.5 * minmod(ppx - p, p - m);
          }
          adv += v * slope;
        }
        // Godunov upwinding of |grad phi| for an expanding front: use the
        // one-sided slopes that feed the motion, ignore the rest.
        const double g = std::max(std::max(m, 0.0), std::max(-p, 0.0));
        grad2 += g * g;
      }

      double pn = pc - dt * (adv + std::sqrt(grad2));
      // Reachable sets are nested in time, so phi never rises: evolving the
      // running minimum leaves every first crossing untouched and keeps the
      // wake behind the front from being dragged back up by advection.
      pn = std::min(std::clamp(pn, -clamp_, clamp_), pc);
      out[i] = pn;

      if (pn != pc) {
        rbld.mark(static_cast<std::int32_t>(c));
        const double delta = std::fabs(pn - pc);
        if (delta > max_delta) max_delta = delta;
        if (pn <= 0.0 && arrival_[i] == kInf) {
          // First crossing: pc > 0 >= pn here, interpolate in time.
          arrival_[i] = t + dt * pc / (pc - pn);
          ++newly_finite;
        }
      }
    }
  }
}

}  // namespace

ScalarGridField solve_arrival(const VectorField& field, const Grid& grid, const VecN& source,
                              const ArrivalParams& params, ArrivalStats* stats) {
  if (field.dim() != grid.dim()) throw std::invalid_argument("solve_arrival: field/grid dimension mismatch");
  require_solver_grid(grid);
  if (!(params.cfl > 0.0) || params.cfl > 0.5)
    throw std::invalid_argument("solve_arrival: cfl must be in (0, 0.5]");
  if (!(params.horizon > 0.0)) throw std::invalid_argument("solve_arrival: horizon must be positive");
  if (grid.margin(source) < 4.0 * grid.spacing() - 1e-12)
    throw std::invalid_argument("solve_arrival: source must sit inside the grid with margin >= 4h");

  double vmax;
  if (field.component_sup_bound()) {
    vmax = *field.component_sup_bound();
  } else {
    vmax = sup_norm_estimate(field, grid.box(), 4096);
  }
  const double dt = params.cfl * grid.spacing() / (vmax + 1.0);
  if (params.horizon < dt)
    throw std::invalid_argument("solve_arrival: horizon is smaller than one time step");

  ArrivalStepper stepper(field, grid, source, params);

  const auto max_steps = static_cast<std::int64_t>(std::ceil(params.horizon / dt));
  std::int64_t s = 0;
  bool stationary = false;
  for (; s < max_steps; ++s) {
    const double t = static_cast<double>(s) * dt;
    const StepResult res = stepper.step(t, dt);
    if (stepper.finite_count() == grid.total_nodes()) {
      ++s;
      break;
    }
    if (stepper.frozen()) {
      // Bit-exact steady state: no node can ever change again.
      stationary = true;
      ++s;
      break;
    }
    if (s + 1 < max_steps) {
      const auto remaining = static_cast<double>(max_steps - s - 1);
      if (res.max_delta * remaining < 1e-3 * grid.spacing()) {
        // The front cannot move even a thousandth of a cell in the remaining
        // budget; every arrival it could still record is below discretization
        // error.
        stationary = true;
        ++s;
        break;
      }
    }
  }

  if (stats) {
    stats->steps = s;
    stats->dt = dt;
    stats->stop_time = static_cast<double>(s) * dt;
    stats->finite_nodes = stepper.finite_count();
    stats->all_reached = stepper.finite_count() == grid.total_nodes();
    stats->stationary = stationary;
    stats->speed_bound = vmax;
  }
  return stepper.take_arrival();
}

GridMask reachable_mask(const ScalarGridField& arrival, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("reachable_mask: tau must be >= 0");
  GridMask mask{arrival.grid(), std::vector<std::uint8_t>(static_cast<std::size_t>(arrival.size()), 0)};
  for (std::int64_t i = 0; i < arrival.size(); ++i)
    mask.on[static_cast<std::size_t>(i)] = arrival[i] < tau ? 1 : 0;
  return mask;
}

std::optional<VecN> arrival_gradient(const ScalarGridField& arrival, std::int64_t node) {
  const Grid& g = arrival.grid();
  const int d = g.dim();
  if (arrival[node] == kInf) return std::nullopt;
  std::array<std::int64_t, kMaxDim> idx{};
  g.unflat(node, std::span<std::int64_t>(idx.data(), d));
  VecN grad(d);
  for (int a = 0; a < d; ++a) {
    const double vm = idx[a] > 0 ? arrival[node - g.node_stride(a)] : kInf;
    const double vp = idx[a] < g.cells(a) ? arrival[node + g.node_stride(a)] : kInf;
    const double vc = arrival[node];
    if (vm < kInf && vp < kInf) grad[a] = (vp - vm) / (2.0 * g.spacing());
    else if (vp < kInf) grad[a] = (vp - vc) / g.spacing();
    else if (vm < kInf) grad[a] = (vc - vm) / g.spacing();
    else return std::nullopt;
  }
  return grad;
}

std::vector<BoundaryFace> boundary_faces(const GridMask& mask) {
  const Grid& g = mask.grid;
  const int d = g.dim();
  if (mask.count() == 0) throw std::invalid_argument("boundary_faces: mask has no reachable node");

  std::vector<BoundaryFace> faces;
  std::array<std::int64_t, kMaxDim> idx{};
  for (std::int64_t i = 0; i < g.total_nodes(); ++i) {
    g.unflat(i, std::span<std::int64_t>(idx.data(), d));
    for (int a = 0; a < d; ++a) {
      if (idx[a] + 1 > g.cells(a)) continue;
      const std::int64_t j = i + g.node_stride(a);
      const bool mi = mask.test(i), mj = mask.test(j);
      if (mi == mj) continue;
      BoundaryFace f;
      f.axis = a;
      if (mi) {
        f.inside_node = i;
        f.outside_node = j;
        f.normal_sign = -1.0;  // inward normal points from j toward i
      } else {
        f.inside_node = j;
        f.outside_node = i;
        f.normal_sign = 1.0;
      }
      faces.push_back(f);
    }
  }
  return faces;
}

}  // namespace flowreach
