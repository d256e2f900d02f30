#include "flowreach/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace flowreach {

ControlSignal::ControlSignal(std::vector<double> breakpoints, std::vector<VecN> values, double bound)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)), bound_(bound) {
  if (breakpoints_.empty() || breakpoints_.size() != values_.size())
    throw std::invalid_argument("ControlSignal: need one value per breakpoint");
  if (breakpoints_.front() != 0.0)
    throw std::invalid_argument("ControlSignal: first breakpoint must be 0");
  if (!(bound_ > 0.0) || bound_ > 1.0)
    throw std::invalid_argument("ControlSignal: bound must be in (0, 1]");
  for (std::size_t k = 0; k + 1 < breakpoints_.size(); ++k)
    if (!(breakpoints_[k] < breakpoints_[k + 1]))
      throw std::invalid_argument("ControlSignal: breakpoints must be strictly increasing");
  for (const auto& v : values_)
    if (v.norm() > bound_ + 1e-12)
      throw std::invalid_argument("ControlSignal: value exceeds bound");
}

ControlSignal ControlSignal::constant(const VecN& a, double bound) {
  return ControlSignal({0.0}, {a}, bound);
}

const VecN& ControlSignal::value_at(double t) const {
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  const auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - breakpoints_.begin() - 1));
  return values_[k];
}

ControlSignal ControlSignal::reversed(double duration) const {
  std::vector<double> bp;
  std::vector<VecN> vals;
  bp.push_back(0.0);
  // alpha'(s) = alpha(duration - s): segment [t_k, t_{k+1}) maps to
  // (duration - t_{k+1}, duration - t_k].
  for (std::size_t k = breakpoints_.size(); k-- > 0;) {
    vals.push_back(values_[k]);
    if (k > 0) {
      const double s = duration - breakpoints_[k];
      if (s > bp.back()) bp.push_back(s);
      else vals.pop_back();  // segment entirely outside [0, duration]
    }
  }
  return ControlSignal(std::move(bp), std::move(vals), bound_);
}

Trajectory integrate(const VectorField& field, const VecN& x0, const ControlSignal& control,
                     double t_end, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
  if (!(t_end >= 0.0)) throw std::invalid_argument("integrate: t_end must be >= 0");

  // Step targets: multiples of dt plus every control breakpoint in (0, t_end).
  std::vector<double> times;
  times.push_back(0.0);
  for (std::int64_t k = 1; static_cast<double>(k) * dt < t_end; ++k)
    times.push_back(static_cast<double>(k) * dt);
  for (std::size_t i = 1; i < control.breakpoints().size(); ++i) {
    const double b = control.breakpoints()[i];
    if (b > 0.0 && b < t_end) times.push_back(b);
  }
  times.push_back(t_end);
  std::sort(times.begin(), times.end());
  const double merge_eps = 1e-12 * std::max(1.0, t_end);
  std::vector<double> merged;
  merged.reserve(times.size());
  for (double tv : times)
    if (merged.empty() || tv - merged.back() > merge_eps) merged.push_back(tv);
  times = std::move(merged);

  Trajectory traj{{}, {}, control, x0, dt};
  traj.t.reserve(times.size());
  traj.x.reserve(times.size());
  traj.t.push_back(0.0);
  traj.x.push_back(x0);

  VecN x = x0;
  for (std::size_t s = 0; s + 1 < times.size(); ++s) {
    const double h = times[s + 1] - times[s];
    const VecN& a = control.value_at(times[s]);
    const VecN k1 = field(x) + a;
    const VecN k2 = field(x + k1 * (0.5 * h)) + a;
    const VecN k3 = field(x + k2 * (0.5 * h)) + a;
    const VecN k4 = field(x + k3 * h) + a;
    x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    traj.t.push_back(times[s + 1]);
    traj.x.push_back(x);
  }
  return traj;
}

ReplayError replay_error(const Trajectory& traj, const VecN& target) {
  if (traj.x.empty()) throw std::invalid_argument("replay_error: empty trajectory");
  return ReplayError{(traj.endpoint() - target).norm(), traj.duration()};
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  const int d = traj.source.dim();
  out << "t";
  for (int a = 0; a < d; ++a) out << ",x" << (a + 1);
  for (int a = 0; a < d; ++a) out << ",a" << (a + 1);
  out << "\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    put(traj.t[i]);
    for (int a = 0; a < d; ++a) {
      out << ",";
      put(traj.x[i][a]);
    }
    const VecN& al = traj.control.value_at(traj.t[i]);
    for (int a = 0; a < d; ++a) {
      out << ",";
      put(al[a]);
    }
    out << "\n";
  }
}

}  // namespace flowreach
