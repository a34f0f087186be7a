#include "aeroprint/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace aeroprint {
namespace {

struct Tolerance {
  double length = 0.0;
  double area = 0.0;
};

Tolerance tolerance_for(std::span<const Vec2> points, const Loop& loop) {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = min_x;
  double max_x = -min_x;
  double max_y = -min_x;
  for (std::size_t i : loop) {
    min_x = std::min(min_x, points[i].x);
    min_y = std::min(min_y, points[i].y);
    max_x = std::max(max_x, points[i].x);
    max_y = std::max(max_y, points[i].y);
  }
  const double extent = std::max({max_x - min_x, max_y - min_y, 1e-12});
  return {1e-10 * extent, 1e-10 * extent * extent};
}

double orient(Vec2 a, Vec2 b, Vec2 c) { return cross2(b - a, c - a); }

bool left(Vec2 a, Vec2 b, Vec2 c) { return orient(a, b, c) > 0.0; }
bool left_on(Vec2 a, Vec2 b, Vec2 c) { return orient(a, b, c) >= 0.0; }

// Is the direction from `apex` towards `q` inside the interior wedge at
// `apex`, given its predecessor and successor on a loop whose interior is
// to the left?
bool in_cone(Vec2 prev, Vec2 apex, Vec2 next, Vec2 q) {
  if (left_on(apex, next, prev)) {
    return left(apex, q, prev) && left(q, apex, next);
  }
  return !(left_on(apex, q, next) && left_on(q, apex, prev));
}

double segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double o1 = orient(a, b, c);
  const double o2 = orient(a, b, d);
  const double o3 = orient(c, d, a);
  const double o4 = orient(c, d, b);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) {
    return 0.0;
  }
  return std::min({distance_to_segment(a, c, d), distance_to_segment(b, c, d),
                   distance_to_segment(c, a, b), distance_to_segment(d, a, b)});
}

bool in_triangle_closed(Vec2 q, Vec2 a, Vec2 b, Vec2 c, double area_eps) {
  return orient(a, b, q) >= -area_eps && orient(b, c, q) >= -area_eps &&
         orient(c, a, q) >= -area_eps;
}

struct Bridge {
  std::size_t hole_pos = 0;
  std::size_t poly_pos = 0;
  double length = std::numeric_limits<double>::infinity();
};

// Looks for the shortest segment joining a hole vertex to a vertex of the
// merged polygon that stays inside the region and touches nothing else.
std::optional<Bridge> find_bridge(std::span<const Vec2> points, const Loop& merged,
                                  const Loop& hole, const std::vector<const Loop*>& obstacles,
                                  const PolygonWithHoles& original, Tolerance tol) {
  std::optional<Bridge> best;
  const std::size_t n = merged.size();
  const std::size_t m = hole.size();

  auto blocked_by = [&](const Loop& loop, std::size_t hi, std::size_t pi) {
    const Vec2 h = points[hi];
    const Vec2 p = points[pi];
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const std::size_t e0 = loop[k];
      const std::size_t e1 = loop[(k + 1) % loop.size()];
      const bool touches_h = e0 == hi || e1 == hi;
      const bool touches_p = e0 == pi || e1 == pi;
      if (touches_h && touches_p) {
        return true;
      }
      if (touches_h || touches_p) {
        const std::size_t shared = touches_h ? hi : pi;
        const std::size_t other = e0 == shared ? e1 : e0;
        const std::size_t far_end = touches_h ? pi : hi;
        if (distance_to_segment(points[other], h, p) <= tol.length ||
            distance_to_segment(points[far_end], points[e0], points[e1]) <= tol.length) {
          return true;
        }
        continue;
      }
      if (segment_distance(h, p, points[e0], points[e1]) <= tol.length) {
        return true;
      }
    }
    return false;
  };

  for (std::size_t hp = 0; hp < m; ++hp) {
    const std::size_t hi = hole[hp];
    const Vec2 h = points[hi];
    const Vec2 h_prev = points[hole[(hp + m - 1) % m]];
    const Vec2 h_next = points[hole[(hp + 1) % m]];
    for (std::size_t pp = 0; pp < n; ++pp) {
      const std::size_t pi = merged[pp];
      const Vec2 p = points[pi];
      const double length = std::hypot(p.x - h.x, p.y - h.y);
      if (best && length >= best->length) {
        continue;
      }
      const Vec2 p_prev = points[merged[(pp + n - 1) % n]];
      const Vec2 p_next = points[merged[(pp + 1) % n]];
      if (pi == hi) {
        // Hole touches the polygon at a shared vertex: splice in place.
        if (in_cone(p_prev, p, p_next, h_next) || in_cone(p_prev, p, p_next, h_prev)) {
          best = Bridge{hp, pp, 0.0};
        }
        continue;
      }
      if (length <= tol.length) {
        continue;
      }
      if (!in_cone(p_prev, p, p_next, h) || !in_cone(h_prev, h, h_next, p)) {
        continue;
      }
      const Vec2 mid = (h + p) * 0.5;
      if (!point_in_loop(mid, points, original.outer)) {
        continue;
      }
      bool inside_hole = false;
      for (const Loop& other : original.holes) {
        if (point_in_loop(mid, points, other)) {
          inside_hole = true;
          break;
        }
      }
      if (inside_hole || blocked_by(merged, hi, pi)) {
        continue;
      }
      bool blocked = false;
      for (const Loop* obstacle : obstacles) {
        if (blocked_by(*obstacle, hi, pi)) {
          blocked = true;
          break;
        }
      }
      if (!blocked) {
        best = Bridge{hp, pp, length};
      }
    }
  }
  return best;
}

Loop splice(const Loop& merged, const Loop& hole, const Bridge& bridge) {
  Loop out;
  out.reserve(merged.size() + hole.size() + 2);
  for (std::size_t k = 0; k <= bridge.poly_pos; ++k) {
    out.push_back(merged[k]);
  }
  const bool shared = merged[bridge.poly_pos] == hole[bridge.hole_pos];
  const std::size_t m = hole.size();
  for (std::size_t k = shared ? 1 : 0; k <= m; ++k) {
    out.push_back(hole[(bridge.hole_pos + k) % m]);
  }
  if (!shared) {
    out.push_back(merged[bridge.poly_pos]);
  }
  for (std::size_t k = bridge.poly_pos + 1; k < merged.size(); ++k) {
    out.push_back(merged[k]);
  }
  return out;
}

Loop merge_holes(std::span<const Vec2> points, const PolygonWithHoles& polygon, Tolerance tol) {
  Loop merged = polygon.outer;
  std::vector<const Loop*> pending;
  for (const Loop& hole : polygon.holes) {
    pending.push_back(&hole);
  }
  auto max_x = [&](const Loop* loop) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i : *loop) {
      best = std::max(best, points[i].x);
    }
    return best;
  };
  std::stable_sort(pending.begin(), pending.end(),
                   [&](const Loop* a, const Loop* b) { return max_x(a) > max_x(b); });

  for (std::size_t k = 0; k < pending.size(); ++k) {
    const Loop& hole = *pending[k];
    std::vector<const Loop*> obstacles(pending.begin() + static_cast<std::ptrdiff_t>(k),
                                       pending.end());
    std::optional<Bridge> bridge = find_bridge(points, merged, hole, obstacles, polygon, tol);
    if (!bridge) {
      // Numerically awkward input: fall back to the globally shortest pair.
      Bridge fallback;
      for (std::size_t hp = 0; hp < hole.size(); ++hp) {
        for (std::size_t pp = 0; pp < merged.size(); ++pp) {
          const Vec2 d = points[hole[hp]] - points[merged[pp]];
          const double len = std::hypot(d.x, d.y);
          if (len < fallback.length) {
            fallback = Bridge{hp, pp, len};
          }
        }
      }
      bridge = fallback;
    }
    merged = splice(merged, hole, *bridge);
  }
  return merged;
}

}  // namespace

double signed_area(std::span<const Vec2> points, const Loop& loop) {
  double twice = 0.0;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const Vec2 a = points[loop[k]];
    const Vec2 b = points[loop[(k + 1) % loop.size()]];
    twice += cross2(a, b);
  }
  return 0.5 * twice;
}

double signed_area(std::span<const Vec2> ring) {
  double twice = 0.0;
  for (std::size_t k = 0; k < ring.size(); ++k) {
    twice += cross2(ring[k], ring[(k + 1) % ring.size()]);
  }
  return 0.5 * twice;
}

bool point_in_ring(Vec2 p, std::span<const Vec2> ring) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = ring[i];
    const Vec2 b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) {
        inside = !inside;
      }
    }
  }
  return inside;
}

bool point_in_loop(Vec2 p, std::span<const Vec2> points, const Loop& loop) {
  std::vector<Vec2> ring;
  ring.reserve(loop.size());
  for (std::size_t i : loop) {
    ring.push_back(points[i]);
  }
  return point_in_ring(p, ring);
}

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot2(ab, ab);
  double t = len2 > 0.0 ? dot2(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec2 d = p - (a + ab * t);
  return std::hypot(d.x, d.y);
}

double distance_to_ring(Vec2 p, std::span<const Vec2> ring) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ring.size(); ++k) {
    best = std::min(best, distance_to_segment(p, ring[k], ring[(k + 1) % ring.size()]));
  }
  return best;
}

std::vector<PolygonWithHoles> group_loops(std::span<const Vec2> points,
                                          const std::vector<Loop>& loops) {
  struct Candidate {
    const Loop* loop;
    double area;
  };
  std::vector<Candidate> outers;
  std::vector<Candidate> holes;
  for (const Loop& loop : loops) {
    if (loop.size() < 3) {
      continue;
    }
    const double area = signed_area(points, loop);
    if (std::abs(area) <= tolerance_for(points, loop).area) {
      continue;
    }
    (area > 0.0 ? outers : holes).push_back({&loop, area});
  }

  std::vector<PolygonWithHoles> result;
  result.reserve(outers.size());
  for (const Candidate& outer : outers) {
    result.push_back({*outer.loop, {}});
  }

  auto contains = [&](const Candidate& outer, const Candidate& hole) {
    const Tolerance tol = tolerance_for(points, *outer.loop);
    std::vector<Vec2> ring;
    for (std::size_t i : *outer.loop) {
      ring.push_back(points[i]);
    }
    auto classify = [&](Vec2 q) -> int {
      if (distance_to_ring(q, ring) <= tol.length) {
        return 0;
      }
      return point_in_ring(q, ring) ? 1 : -1;
    };
    const Loop& h = *hole.loop;
    for (std::size_t k = 0; k < h.size(); ++k) {
      if (const int c = classify(points[h[k]]); c != 0) {
        return c > 0;
      }
    }
    for (std::size_t k = 0; k < h.size(); ++k) {
      const Vec2 mid = (points[h[k]] + points[h[(k + 1) % h.size()]]) * 0.5;
      if (const int c = classify(mid); c != 0) {
        return c > 0;
      }
    }
    return std::abs(outer.area) > std::abs(hole.area);
  };

  for (const Candidate& hole : holes) {
    std::optional<std::size_t> owner;
    for (std::size_t k = 0; k < outers.size(); ++k) {
      if (std::abs(outers[k].area) + 1e-15 < std::abs(hole.area)) {
        continue;
      }
      if (!contains(outers[k], hole)) {
        continue;
      }
      if (!owner || std::abs(outers[k].area) < std::abs(outers[*owner].area)) {
        owner = k;
      }
    }
    if (owner) {
      result[*owner].holes.push_back(*hole.loop);
    }
  }
  return result;
}

std::vector<std::array<std::size_t, 3>> triangulate(std::span<const Vec2> points,
                                                    const PolygonWithHoles& polygon) {
  std::vector<std::array<std::size_t, 3>> triangles;
  if (polygon.outer.size() < 3) {
    return triangles;
  }
  const Tolerance tol = tolerance_for(points, polygon.outer);
  Loop poly = polygon.holes.empty() ? polygon.outer : merge_holes(points, polygon, tol);
  triangles.reserve(poly.size());

  std::size_t start = 0;
  while (poly.size() > 3) {
    const std::size_t n = poly.size();
    bool clipped = false;
    for (std::size_t step = 0; step < n && !clipped; ++step) {
      const std::size_t i = (start + step) % n;
      const std::size_t ia = poly[(i + n - 1) % n];
      const std::size_t ib = poly[i];
      const std::size_t ic = poly[(i + 1) % n];
      const Vec2 a = points[ia];
      const Vec2 b = points[ib];
      const Vec2 c = points[ic];
      if (orient(a, b, c) <= tol.area) {
        continue;
      }
      bool blocked = false;
      for (std::size_t j = 0; j < n && !blocked; ++j) {
        const std::size_t q = poly[j];
        if (q == ia || q == ib || q == ic) {
          continue;
        }
        blocked = in_triangle_closed(points[q], a, b, c, tol.area);
      }
      if (!blocked) {
        triangles.push_back({ia, ib, ic});
        poly.erase(poly.begin() + static_cast<std::ptrdiff_t>(i));
        start = i;
        clipped = true;
      }
    }
    if (clipped) {
      continue;
    }
    // No proper ear: retire a degenerate (collinear) vertex, which keeps
    // edge connectivity intact at zero area; otherwise the most convex one.
    std::size_t pick = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double o = orient(points[poly[(i + n - 1) % n]], points[poly[i]],
                              points[poly[(i + 1) % n]]);
      if (std::abs(o) <= tol.area) {
        pick = i;
        break;
      }
      if (o > best) {
        best = o;
        pick = i;
      }
    }
    triangles.push_back({poly[(pick + n - 1) % n], poly[pick], poly[(pick + 1) % n]});
    poly.erase(poly.begin() + static_cast<std::ptrdiff_t>(pick));
    start = pick;
  }
  triangles.push_back({poly[0], poly[1], poly[2]});
  return triangles;
}

}  // namespace aeroprint
