#ifndef FLOWREACH_DYNAMICS_HPP
#define FLOWREACH_DYNAMICS_HPP

#include <iosfwd>
#include <vector>

#include "flowreach/flowfield.hpp"
#include "flowreach/vec.hpp"

namespace flowreach {

/// Piecewise-constant control alpha(t): value values[k] on
/// [breakpoints[k], breakpoints[k+1]), the last value extending to +inf.
/// All values satisfy ||alpha_k|| <= bound, bound in (0, 1].
class ControlSignal {
 public:
  ControlSignal(std::vector<double> breakpoints, std::vector<VecN> values, double bound);

  static ControlSignal constant(const VecN& a, double bound = 1.0);

  const VecN& value_at(double t) const;
  double bound() const { return bound_; }
  int dim() const { return values_.front().dim(); }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<VecN>& values() const { return values_; }

  /// Time-reversed control on [0, duration]: alpha'(s) = alpha(duration - s).
  ControlSignal reversed(double duration) const;

 private:
  std::vector<double> breakpoints_;  // breakpoints_[0] == 0, strictly increasing
  std::vector<VecN> values_;         // one per breakpoint
  double bound_;
};

/// Time-stamped states of one integration, along with what produced them.
struct Trajectory {
  std::vector<double> t;
  std::vector<VecN> x;
  ControlSignal control;
  VecN source;
  double dt = 0.0;

  const VecN& endpoint() const { return x.back(); }
  double duration() const { return t.back(); }
};

/// Classical RK4 on xdot = V(x) + alpha(t). Steps never straddle control
/// breakpoints, so alpha is constant within each step and the local error
/// stays O(dt^5).
Trajectory integrate(const VectorField& field, const VecN& x0, const ControlSignal& control,
                     double t_end, double dt);

struct ReplayError {
  double terminal_distance = 0.0;
  double duration = 0.0;
};

/// Distance from the trajectory endpoint to the target, plus the duration.
/// Certifies that an extracted control realizes a claimed travel time.
ReplayError replay_error(const Trajectory& traj, const VecN& target);

/// CSV: header t,x1,...,xd,a1,...,ad; one row per sample; 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace flowreach

#endif  // FLOWREACH_DYNAMICS_HPP
