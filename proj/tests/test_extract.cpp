#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "flowreach/extract.hpp"
#include "flowreach/harness.hpp"
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

TEST_CASE("still water: the extracted path is straight and timed by distance") {
  auto zero = make_builtin("constant", json{{"v", {0.0, 0.0}}});
  const Grid g = square_grid(-1.0, 1.0, 128);
  const double h = g.spacing();
  const auto T = solve_arrival(zero, g, VecN{0, 0}, {.horizon = 4.0}, nullptr);
  const VecN target{0.7, 0.0};
  const auto res = extract_trajectory(zero, T, VecN{0, 0}, target, 0.5 * h);
  CHECK(res.duration == doctest::Approx(0.7).epsilon(4.0 * h / 0.7));
  for (const auto& p : res.path.x) CHECK(std::fabs(p[1]) <= 2.0 * h);
  // Replay through the integrator closes the loop.
  const auto replay = integrate(zero, res.path.x.front(), res.control, res.duration, 1e-3);
  CHECK((replay.endpoint() - target).norm() <= 2.0 * h);
}

TEST_CASE("upstream extraction against a constant drift") {
  auto f = make_builtin("constant", json{{"v", {0.5, 0.0}}});
  const Grid g = square_grid(-1.5, 1.5, 192);
  const auto T = solve_arrival(f, g, VecN{0, 0}, {.horizon = 10.0}, nullptr);
  const auto res = extract_trajectory(f, T, VecN{0, 0}, VecN{-1, 0}, 0.5 * g.spacing());
  CHECK(res.duration == doctest::Approx(2.0).epsilon(0.07));
}

TEST_CASE("closed loop on the cellular flow") {
  auto f = make_builtin("cellular", json{{"amplitude", 10.0}, {"cell", 1.0}});
  const Grid g = square_grid(0.0, 4.0, 256);
  const double h = g.spacing();
  ArrivalStats stats;
  const auto T = solve_arrival(f, g, VecN{2, 2}, {.horizon = 30.0}, &stats);
  REQUIRE(stats.all_reached);
  SplitMix64 rng(27);
  Box inner{VecN{0.5, 0.5}, VecN{3.5, 3.5}};
  const double replay_dt = h / (4.0 * 11.0);
  for (int i = 0; i < 8; ++i) {
    const VecN target = g.position(g.nearest_node(rng.next_point(inner)));
    const auto loop = closed_loop(f, T, VecN{2, 2}, target, replay_dt);
    CHECK(loop.replay.terminal_distance <= 2.0 * h);
    CHECK(loop.extraction.duration <= 1.05 * loop.arrival_at_target + 4.0 * h);
  }
}

TEST_CASE("arrival times descend along the extracted path") {
  auto f = make_builtin("cellular", json{{"amplitude", 6.0}, {"cell", 1.0}});
  const Grid g = square_grid(0.0, 4.0, 128);
  const double h = g.spacing();
  const auto T = solve_arrival(f, g, VecN{2, 2}, {.horizon = 30.0}, nullptr);
  const auto res = extract_trajectory(f, T, VecN{2, 2}, VecN{3.25, 1.25}, 0.5 * h);
  // Walk the path backward (target first): T should rise toward the target,
  // i.e. descend along the backward march, up to interpolation noise.
  double running_max = -1.0;
  for (const auto& p : res.path.x) {
    const double t = T.interpolate(p);
    if (t == kInf) continue;
    CHECK(t >= running_max - 2.0 * h);
    running_max = std::max(running_max, t);
  }
}

TEST_CASE("extracted controls never exceed the unit ball") {
  auto f = make_builtin("cellular", json{{"amplitude", 10.0}, {"cell", 1.0}});
  const Grid g = square_grid(0.0, 4.0, 128);
  const auto T = solve_arrival(f, g, VecN{2, 2}, {.horizon = 30.0}, nullptr);
  const auto res = extract_trajectory(f, T, VecN{2, 2}, VecN{0.75, 3.25}, 0.5 * g.spacing());
  CHECK(res.control.bound() == 1.0);
  for (const auto& a : res.control.values()) CHECK(a.norm() <= 1.0 + 1e-12);
  CHECK(res.clip_fraction <= 0.05);
}

TEST_CASE("extraction validates its inputs") {
  auto f = make_builtin("constant", json{{"v", {2.0, 0.0}}});
  const Grid g = square_grid(-2.0, 2.0, 128);
  const double h = g.spacing();
  const auto T = solve_arrival(f, g, VecN{0, 0}, {.horizon = 50.0}, nullptr);
  // Upstream targets are unreachable in a strong drift.
  CHECK_THROWS_WITH_AS(extract_trajectory(f, T, VecN{0, 0}, VecN{-1, 0}, 0.5 * h),
                       doctest::Contains("not finite"), std::exception);
  // Targets in the wall band are rejected.
  CHECK_THROWS_WITH_AS(extract_trajectory(f, T, VecN{0, 0}, VecN{1.99, 0}, 0.5 * h),
                       doctest::Contains("untrusted"), std::exception);
  CHECK_THROWS(extract_trajectory(f, T, VecN{0, 0}, VecN{1, 0}, 0.0));
}
