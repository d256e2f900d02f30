#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "flowreach/dynamics.hpp"
#include "flowreach/levelset.hpp"
#include "flowreach/rng.hpp"
#include "oracle_helpers.hpp"

using namespace flowreach;
using nlohmann::json;

namespace {

Grid square_grid(double lo, double hi, std::int64_t cells) {
  std::vector<std::int64_t> c{cells, cells};
  return Grid(VecN{lo, lo}, VecN{hi, hi}, c);
}

}  // namespace

TEST_CASE("still water: arrival equals distance minus the source radius") {
  auto zero = make_builtin("constant", json{{"v", {0.0, 0.0}}});
  const Grid g = square_grid(-1.0, 1.0, 128);
  const double h = g.spacing();
  ArrivalStats stats;
  const auto T = solve_arrival(zero, g, VecN{0, 0}, {.horizon = 4.0}, &stats);
  CHECK(stats.all_reached);
  const auto tr = trusted_nodes(g, 5.0 * h);
  double worst = 0.0;
  for (std::int64_t i = 0; i < g.total_nodes(); ++i) {
    if (!tr[static_cast<std::size_t>(i)]) continue;
    const double expect = std::max(g.position(i).norm() - 2.0 * h, 0.0);
    worst = std::max(worst, std::fabs(T[i] - expect));
  }
  INFO("worst |T - (dist - r0)| = ", worst / h, " h");
  CHECK(worst <= 3.0 * h);
}

TEST_CASE("constant drift matches the closed-form travel time both ways") {
  auto f = make_builtin("constant", json{{"v", {0.5, 0.0}}});
  const Grid g = square_grid(-1.5, 1.5, 192);
  const auto T = solve_arrival(f, g, VecN{0, 0}, {.horizon = 10.0}, nullptr);
  const VecN v{0.5, 0.0};
  const double down = testoracle::constant_field_time(VecN{1, 0}, v);
  const double up = testoracle::constant_field_time(VecN{-1, 0}, v);
  CHECK(down == doctest::Approx(2.0 / 3.0));  // oracle sanity
  CHECK(up == doctest::Approx(2.0));
  CHECK(T[g.nearest_node(VecN{1, 0})] == doctest::Approx(down).epsilon(0.05));
  CHECK(T[g.nearest_node(VecN{-1, 0})] == doctest::Approx(up).epsilon(0.05));
}

TEST_CASE("strong drift leaves everything upstream unreachable") {
  auto f = make_builtin("constant", json{{"v", {2.0, 0.0}}});
  const Grid g = square_grid(-2.0, 2.0, 256);
  const double h = g.spacing();
  ArrivalStats stats;
  const auto T = solve_arrival(f, g, VecN{0, 0}, {.horizon = 100.0}, &stats);
  CHECK(stats.stationary);  // froze long before the horizon
  for (std::int64_t i = 0; i < g.total_nodes(); ++i) {
    if (g.position(i)[0] <= -(2.0 * h + h)) CHECK(T[i] == kInf);
  }
  // And the downstream axis is reached.
  CHECK(T[g.nearest_node(VecN{1.0, 0.0})] < kInf);
}

TEST_CASE("reachable masks are empty at tau=0 and nested in tau") {
  auto f = make_builtin("cellular", json{{"amplitude", 10.0}, {"cell", 1.0}});
  const Grid g = square_grid(0.0, 2.0, 64);
  const auto T = solve_arrival(f, g, VecN{1, 1}, {.horizon = 40.0}, nullptr);
  CHECK(reachable_mask(T, 0.0).count() == 0);
  SplitMix64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    double t1 = rng.next_in(0.0, 1.0), t2 = rng.next_in(0.0, 1.0);
    if (t1 > t2) std::swap(t1, t2);
    const auto m1 = reachable_mask(T, t1);
    const auto m2 = reachable_mask(T, t2);
    for (std::int64_t i = 0; i < g.total_nodes(); ++i)
      if (m1.test(i)) CHECK(m2.test(i));
  }
  // tau = +inf covers every node once the horizon swallowed the box.
  CHECK(reachable_mask(T, kInf).count() == g.total_nodes());
}

TEST_CASE("the mollified-sign flow cannot be escaped") {
  auto f = make_builtin("mollified_sign", json{{"amplitude", 10.0}, {"rho", 0.5}});
  const Grid g = square_grid(-2.0, 6.0, 256);  // h = 1/32
  const double h = g.spacing();
  const double delta = 0.5 + 2.0 * h;
  const auto T = solve_arrival(f, g, VecN{2, 2}, {.horizon = 10.0}, nullptr);
  const auto mask = reachable_mask(T, 10.0);
  for (std::int64_t i = 0; i < g.total_nodes(); ++i) {
    const VecN p = g.position(i);
    if (p[0] < 1.0 - delta || p[1] < 1.0 - delta) CHECK(!mask.test(i));
  }
  CHECK(mask.count() > 0);
}

TEST_CASE("boundary faces of simple masks") {
  const Grid g = square_grid(0.0, 1.0, 16);
  const double h = g.spacing();

  GridMask empty{g, std::vector<std::uint8_t>(static_cast<std::size_t>(g.total_nodes()), 0)};
  CHECK_THROWS(boundary_faces(empty));

  GridMask one = empty;
  one.on[static_cast<std::size_t>(g.nearest_node(VecN{0.5, 0.5}))] = 1;
  const auto faces = boundary_faces(one);
  CHECK(faces.size() == 4);  // 2d
  double area = 0.0;
  for (const auto& f : faces) area += h;
  CHECK(area == doctest::Approx(4.0 * h));

  GridMask half = empty;
  for (std::int64_t i = 0; i < g.total_nodes(); ++i)
    half.on[static_cast<std::size_t>(i)] = g.position(i)[0] >= 0.5 ? 1 : 0;
  const auto hfaces = boundary_faces(half);
  for (const auto& f : hfaces) {
    CHECK(f.axis == 0);
    CHECK(f.normal_sign == 1.0);  // inward normal points into {x >= 0.5}
  }
}

TEST_CASE("staircase perimeter of a disk approaches 4/pi of the true one") {
  const Grid g = square_grid(-1.0, 1.0, 128);
  const double h = g.spacing();
  const double R = 0.5;
  GridMask disk{g, std::vector<std::uint8_t>(static_cast<std::size_t>(g.total_nodes()), 0)};
  for (std::int64_t i = 0; i < g.total_nodes(); ++i)
    disk.on[static_cast<std::size_t>(i)] = g.position(i).norm() < R ? 1 : 0;
  const auto faces = boundary_faces(disk);
  const double ratio = static_cast<double>(faces.size()) * h / (2.0 * M_PI * R);
  INFO("measured staircase/true perimeter ratio = ", ratio);
  CHECK(ratio == doctest::Approx(4.0 / M_PI).epsilon(0.05));
}

TEST_CASE("arrival fields agree exactly where a shorter horizon was finite") {
  auto f = make_builtin("cellular", json{{"amplitude", 4.0}, {"cell", 1.0}});
  const Grid g = square_grid(0.0, 2.0, 64);
  const auto T1 = solve_arrival(f, g, VecN{1, 1}, {.horizon = 0.5}, nullptr);
  const auto T2 = solve_arrival(f, g, VecN{1, 1}, {.horizon = 1.5}, nullptr);
  std::int64_t finite = 0;
  for (std::int64_t i = 0; i < g.total_nodes(); ++i) {
    if (T1[i] < kInf) {
      ++finite;
      CHECK(T1[i] == T2[i]);  // bit-exact
    }
  }
  CHECK(finite > 100);
}

TEST_CASE("a drifting particle is always reachable no slower than its drift time") {
  auto f = make_builtin("cellular", json{{"amplitude", 10.0}, {"cell", 1.0}});
  const Grid g = square_grid(0.0, 4.0, 128);
  const double h = g.spacing();
  const VecN source{1.5, 1.5};
  const auto T = solve_arrival(f, g, source, {.horizon = 20.0}, nullptr);
  for (double t : {0.25, 0.5, 1.0}) {
    const auto traj = integrate(f, source, ControlSignal::constant(VecN{0, 0}, 1.0), t, 1e-3);
    if (g.margin(traj.endpoint()) < 5.0 * h) continue;
    const double arr = T[g.nearest_node(traj.endpoint())];
    CHECK(arr <= t + 3.0 * h);
  }
}

TEST_CASE("translating field, grid, and source leaves the arrival field bit-identical") {
  auto f = make_builtin("cellular", json{{"amplitude", 3.0}, {"cell", 1.0}});
  const VecN offset{4.0, -8.0};  // dyadic, so every shifted node position is exact
  const Grid g1 = square_grid(0.0, 2.0, 64);
  const Grid g2(g1.min() + offset, g1.max() + offset, std::vector<std::int64_t>{64, 64});
  const auto T1 = solve_arrival(f, g1, VecN{1, 1}, {.horizon = 5.0}, nullptr);
  const auto T2 = solve_arrival(translate(f, offset), g2, VecN{1, 1} + offset, {.horizon = 5.0}, nullptr);
  for (std::int64_t i = 0; i < g1.total_nodes(); ++i) CHECK(T1[i] == T2[i]);
}

TEST_CASE("constant-field error halves when the grid is refined") {
  auto f = make_builtin("constant", json{{"v", {0.5, 0.0}}});
  auto max_err = [&](std::int64_t cells) {
    const Grid g = square_grid(-1.0, 1.0, cells);
    const auto T = solve_arrival(f, g, VecN{0, 0}, {.horizon = 8.0}, nullptr);
    const auto tr = trusted_nodes(g, 5.0 * g.spacing());
    double worst = 0.0;
    for (std::int64_t i = 0; i < g.total_nodes(); ++i) {
      if (!tr[static_cast<std::size_t>(i)]) continue;
      const VecN p = g.position(i);
      if (p.norm() < 0.2) continue;  // skip the source-ball bias region
      worst = std::max(worst, std::fabs(T[i] - testoracle::constant_field_time(p, VecN{0.5, 0.0})));
    }
    return worst;
  };
  const double e1 = max_err(64);
  const double e2 = max_err(128);
  const double ratio = e1 / e2;
  INFO("refinement ratio ", ratio);
  CHECK(ratio >= 1.4);
  CHECK(ratio <= 2.6);
}

TEST_CASE("three-dimensional arrival matches the constant-field formula") {
  auto f = make_builtin("constant", json{{"v", {0.3, 0.0, 0.0}}});
  std::vector<std::int64_t> cells{48, 48, 48};
  const Grid g(VecN{-1, -1, -1}, VecN{1, 1, 1}, cells);
  const double h = g.spacing();
  const auto T = solve_arrival(f, g, VecN{0, 0, 0}, {.horizon = 6.0}, nullptr);
  SplitMix64 rng(8);
  for (int i = 0; i < 30; ++i) {
    VecN p(3);
    for (int a = 0; a < 3; ++a) p[a] = rng.next_in(-0.7, 0.7);
    if (p.norm() < 0.3) continue;
    const double expect = testoracle::constant_field_time(p, VecN{0.3, 0.0, 0.0});
    const auto node = g.nearest_node(p);
    CHECK(std::fabs(T[node] - testoracle::constant_field_time(g.position(node), VecN{0.3, 0.0, 0.0})) <=
          4.0 * h);
  }
}

TEST_CASE("solver input validation") {
  auto zero = make_builtin("constant", json{{"v", {0.0, 0.0}}});
  const Grid g = square_grid(-1.0, 1.0, 64);
  CHECK_THROWS(solve_arrival(zero, g, VecN{0.99, 0.0}, {.horizon = 1.0}, nullptr));    // margin < 4h
  CHECK_THROWS(solve_arrival(zero, g, VecN{0, 0}, {.horizon = 1e-9}, nullptr));        // horizon < dt
  CHECK_THROWS(solve_arrival(zero, g, VecN{0, 0}, {.horizon = 1.0, .cfl = 0.9}, nullptr));
  CHECK_THROWS(solve_arrival(zero, g, VecN{0, 0}, {.horizon = 1.0, .cfl = 0.0}, nullptr));
}

TEST_CASE("arrival gradient helper handles +inf neighbors") {
  const Grid g = square_grid(0.0, 1.0, 16);
  ScalarGridField T(g, kInf);
  // Finite wedge in one corner region.
  for (std::int64_t i = 0; i < g.total_nodes(); ++i) {
    const VecN p = g.position(i);
    if (p[0] <= 0.5) T[i] = p[0] + 2.0 * p[1];
  }
  const auto mid = arrival_gradient(T, g.nearest_node(VecN{0.25, 0.5}));
  REQUIRE(mid.has_value());
  CHECK((*mid)[0] == doctest::Approx(1.0));
  CHECK((*mid)[1] == doctest::Approx(2.0));
  // One-sided next to the +inf wall.
  const auto edge = arrival_gradient(T, g.nearest_node(VecN{0.5, 0.5}));
  REQUIRE(edge.has_value());
  CHECK((*edge)[0] == doctest::Approx(1.0));
  CHECK(!arrival_gradient(T, g.nearest_node(VecN{0.75, 0.5})).has_value());
}
