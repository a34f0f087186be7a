#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "aeroprint/polygon.hpp"
#include "doctest.h"

using namespace aeroprint;

namespace {

double triangulated_area(std::span<const Vec2> pts,
                         const std::vector<std::array<std::size_t, 3>>& tris) {
  double total = 0.0;
  for (const auto& t : tris) {
    const double a = 0.5 * cross2(pts[t[1]] - pts[t[0]], pts[t[2]] - pts[t[0]]);
    CHECK(a >= -1e-12);
    total += a;
  }
  return total;
}

Loop iota_loop(std::size_t first, std::size_t count) {
  Loop loop(count);
  for (std::size_t k = 0; k < count; ++k) loop[k] = first + k;
  return loop;
}

}  // namespace

TEST_CASE("square triangulates into two ccw triangles") {
  const std::vector<Vec2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const auto tris = triangulate(pts, {iota_loop(0, 4), {}});
  CHECK(tris.size() == 2);
  CHECK(triangulated_area(pts, tris) == doctest::Approx(1.0));
}

TEST_CASE("collinear boundary vertices are kept and area is exact") {
  // rectangle with extra vertices along two edges
  const std::vector<Vec2> pts{{0, 0}, {0.5, 0}, {1, 0}, {2, 0}, {2, 1}, {1, 1}, {0, 1}, {0, 0.5}};
  const auto tris = triangulate(pts, {iota_loop(0, 8), {}});
  CHECK(tris.size() == 6);
  CHECK(triangulated_area(pts, tris) == doctest::Approx(2.0).epsilon(1e-12));
  std::set<std::size_t> used;
  for (const auto& t : tris) used.insert(t.begin(), t.end());
  CHECK(used.size() == 8);
}

TEST_CASE("frame with a hole is bridged and triangulated") {
  std::vector<Vec2> pts{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  // clockwise hole
  for (Vec2 p : {Vec2{-0.9, -0.9}, Vec2{-0.9, 0.9}, Vec2{0.9, 0.9}, Vec2{0.9, -0.9}}) pts.push_back(p);
  const auto groups = group_loops(pts, {iota_loop(0, 4), iota_loop(4, 4)});
  REQUIRE(groups.size() == 1);
  REQUIRE(groups[0].holes.size() == 1);
  const auto tris = triangulate(pts, groups[0]);
  CHECK(tris.size() == 8);
  CHECK(triangulated_area(pts, tris) == doctest::Approx(4.0 - 3.24).epsilon(1e-12));
}

TEST_CASE("two holes and an island") {
  std::vector<Vec2> pts{{0, 0}, {10, 0}, {10, 4}, {0, 4}};
  auto add_square = [&](double x0, double y0, double s, bool ccw) {
    std::vector<Vec2> sq{{x0, y0}, {x0 + s, y0}, {x0 + s, y0 + s}, {x0, y0 + s}};
    if (!ccw) std::reverse(sq.begin(), sq.end());
    const std::size_t first = pts.size();
    pts.insert(pts.end(), sq.begin(), sq.end());
    return iota_loop(first, 4);
  };
  const Loop outer = iota_loop(0, 4);
  const Loop hole_a = add_square(1, 1, 2, false);
  const Loop hole_b = add_square(6, 1, 2, false);
  const Loop island = add_square(6.5, 1.5, 1, true);
  const auto groups = group_loops(pts, {outer, hole_a, hole_b, island});
  REQUIRE(groups.size() == 2);
  double total = 0.0;
  for (const auto& g : groups) total += triangulated_area(pts, triangulate(pts, g));
  CHECK(total == doctest::Approx(40.0 - 4.0 - 4.0 + 1.0).epsilon(1e-12));
}

TEST_CASE("random star polygons: area conserved, n-2 triangles") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> radius(0.3, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + trial % 40;
    std::vector<Vec2> pts;
    for (std::size_t k = 0; k < n; ++k) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      const double r = radius(rng);
      pts.push_back({r * std::cos(a), r * std::sin(a)});
    }
    const Loop loop = iota_loop(0, n);
    const auto tris = triangulate(pts, {loop, {}});
    CHECK(tris.size() == n - 2);
    CHECK(triangulated_area(pts, tris) == doctest::Approx(signed_area(pts, loop)).epsilon(1e-9));
  }
}

TEST_CASE("point in ring and distance helpers") {
  const std::vector<Vec2> ring{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(point_in_ring({0.5, 0.5}, ring));
  CHECK_FALSE(point_in_ring({1.5, 0.5}, ring));
  CHECK(distance_to_ring({0.5, 0.5}, ring) == doctest::Approx(0.5));
  CHECK(signed_area(ring) == doctest::Approx(1.0));
}
