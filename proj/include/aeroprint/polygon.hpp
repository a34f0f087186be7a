#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace aeroprint {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double cross2(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
constexpr double dot2(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// A loop is a cyclic list of indices into a shared point array.
using Loop = std::vector<std::size_t>;

struct PolygonWithHoles {
  Loop outer;               // counter-clockwise
  std::vector<Loop> holes;  // clockwise
};

/// Shoelace area; positive for counter-clockwise loops.
double signed_area(std::span<const Vec2> points, const Loop& loop);
double signed_area(std::span<const Vec2> ring);

/// Even-odd containment. Points on the boundary may report either answer;
/// use `distance_to_ring` when boundary behaviour matters.
bool point_in_ring(Vec2 p, std::span<const Vec2> ring);
bool point_in_loop(Vec2 p, std::span<const Vec2> points, const Loop& loop);

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b);
double distance_to_ring(Vec2 p, std::span<const Vec2> ring);

/// Sorts loops into outer boundaries (counter-clockwise) and the holes they
/// contain (clockwise). Each hole is attached to the smallest enclosing outer
/// loop. Loops with (near) zero area are dropped.
std::vector<PolygonWithHoles> group_loops(std::span<const Vec2> points,
                                          const std::vector<Loop>& loops);

/// Ear-clipping triangulation. Holes are first spliced into the outer loop
/// through mutually visible bridge edges. Output triangles are
/// counter-clockwise and use only the polygon's own vertex indices, so shared
/// boundary vertices stay shared (no T-junctions are introduced).
std::vector<std::array<std::size_t, 3>> triangulate(std::span<const Vec2> points,
                                                    const PolygonWithHoles& polygon);

}  // namespace aeroprint
