#ifndef FLOWREACH_TESTS_ORACLE_HELPERS_HPP
#define FLOWREACH_TESTS_ORACLE_HELPERS_HPP

// Independent reference computations used to pin expected values in tests.
// Everything here is derived from closed forms or brute force, never from
// the solver code paths under test.

#include <cmath>
#include <numeric>
#include <vector>

#include "flowreach/grid.hpp"
#include "flowreach/vec.hpp"

namespace testoracle {

using flowreach::VecN;

/// Travel time to displacement d under constant drift v with unit swim
/// speed, ||v|| < 1: the unique t with ||d - t v|| = t.
inline double constant_field_time(const VecN& d, const VecN& v) {
  const double dv = d.dot(v);
  const double v2 = v.norm2();
  return (-dv + std::sqrt(dv * dv + (1.0 - v2) * d.norm2())) / (1.0 - v2);
}

/// Stream function of the cellular builtin: psi = (A/k) sin(kx) sin(ky),
/// k = pi / cell.
inline double cellular_psi(double amplitude, double cell, double x, double y) {
  const double k = M_PI / cell;
  return amplitude / k * std::sin(k * x) * std::sin(k * y);
}

/// Exact flux of the cellular field through the vertical segment
/// x = x0, y in [y0, y0 + len] with normal +e1: psi(x0, y0+len) - psi(x0, y0).
inline double cellular_flux_vertical(double amplitude, double cell, double x0, double y0,
                                     double len) {
  return cellular_psi(amplitude, cell, x0, y0 + len) - cellular_psi(amplitude, cell, x0, y0);
}

/// Exact average of the cellular field over the cube centered at c with edge
/// L (closed-form integral of the product of sines).
inline VecN cellular_cube_average(double amplitude, double cell, const VecN& c, double L) {
  const double k = M_PI / cell;
  const double x0 = c[0] - 0.5 * L, x1 = c[0] + 0.5 * L;
  const double y0 = c[1] - 0.5 * L, y1 = c[1] + 0.5 * L;
  // int sin(kx) dx = -(cos(kx1) - cos(kx0))/k ; int cos(ky) dy = (sin(ky1) - sin(ky0))/k
  const double Ix_sin = -(std::cos(k * x1) - std::cos(k * x0)) / k;
  const double Ix_cos = (std::sin(k * x1) - std::sin(k * x0)) / k;
  const double Iy_sin = -(std::cos(k * y1) - std::cos(k * y0)) / k;
  const double Iy_cos = (std::sin(k * y1) - std::sin(k * y0)) / k;
  VecN avg(2);
  avg[0] = amplitude * Ix_sin * Iy_cos / (L * L);
  avg[1] = -amplitude * Ix_cos * Iy_sin / (L * L);
  return avg;
}

/// Worst-case ratio (stencil shortest path) / (Euclidean distance) for unit
/// speed and stencil radius k, by brute force over directions: for each
/// direction the best two-segment combination of adjacent stencil moves.
inline double stencil_metric_ratio(int k, int directions = 3600) {
  std::vector<VecN> moves;
  for (int i = -k; i <= k; ++i)
    for (int j = -k; j <= k; ++j) {
      if (i == 0 && j == 0) continue;
      if (std::abs(std::gcd(std::abs(i), std::abs(j))) != 1) continue;
      moves.push_back(VecN{static_cast<double>(i), static_cast<double>(j)});
    }
  double worst = 1.0;
  for (int a = 0; a < directions; ++a) {
    const double th = 2.0 * M_PI * a / directions;
    const VecN target{std::cos(th), std::sin(th)};
    // Best decomposition target = s*u + t*w with s,t >= 0 over move pairs;
    // cost = (s + t) * |u|,|w| respectively with unit speed = length.
    double best = flowreach::kInf;
    for (const auto& u : moves)
      for (const auto& w : moves) {
        const double det = u[0] * w[1] - u[1] * w[0];
        if (std::fabs(det) < 1e-12) continue;
        const double s = (target[0] * w[1] - target[1] * w[0]) / det;
        const double t = (u[0] * target[1] - u[1] * target[0]) / det;
        if (s < -1e-12 || t < -1e-12) continue;
        best = std::min(best, s * u.norm() + t * w.norm());
      }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace testoracle

#endif  // FLOWREACH_TESTS_ORACLE_HELPERS_HPP
