#include "aeroprint/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "aeroprint/error.hpp"
#include "aeroprint/polygon.hpp"

namespace aeroprint {
namespace {

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

void require_unit(const Vec3& normal) {
  if (!is_finite(normal) || std::abs(norm(normal) - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "plane normal must be unit length");
  }
}

// Orthonormal (u, v) with u x v = n.
std::pair<Vec3, Vec3> plane_basis(const Vec3& n) {
  const double ax = std::abs(n.x);
  const double ay = std::abs(n.y);
  const double az = std::abs(n.z);
  Vec3 axis{1.0, 0.0, 0.0};
  if (ay <= ax && ay <= az) {
    axis = {0.0, 1.0, 0.0};
  } else if (az <= ax && az <= ay) {
    axis = {0.0, 0.0, 1.0};
  }
  const Vec3 u = normalized(cross(axis, n));
  return {u, cross(n, u)};
}

TriangleMesh compact(const std::vector<Vec3>& vertices, const std::vector<Face>& faces) {
  TriangleMesh out;
  if (faces.empty()) {
    return out;
  }
  std::vector<std::uint32_t> remap(vertices.size(), std::numeric_limits<std::uint32_t>::max());
  out.faces.reserve(faces.size());
  for (const Face& f : faces) {
    Face g{};
    for (int k = 0; k < 3; ++k) {
      std::uint32_t& slot = remap[f[k]];
      if (slot == std::numeric_limits<std::uint32_t>::max()) {
        slot = static_cast<std::uint32_t>(out.vertices.size());
        out.vertices.push_back(vertices[f[k]]);
      }
      g[k] = slot;
    }
    out.faces.push_back(g);
  }
  return out;
}

// Closes the open boundary of one split half. Boundary edges of the half
// all lie in the cutting plane; reversed, they enclose the cap region with
// the cap on their left when viewed against `cap_normal`.
void close_with_cap(const std::vector<Vec3>& vertices, const std::vector<char>& on_plane,
                    std::vector<Face>& faces, const Vec3& cap_normal) {
  std::unordered_set<std::uint64_t> directed;
  directed.reserve(faces.size() * 3);
  for (const Face& f : faces) {
    for (int k = 0; k < 3; ++k) {
      directed.insert(edge_key(f[k], f[(k + 1) % 3]));
    }
  }

  // cap edges keyed by their start vertex, in deterministic face order
  std::vector<std::pair<std::uint32_t, std::uint32_t>> cap_edges;
  for (const Face& f : faces) {
    for (int k = 0; k < 3; ++k) {
      const std::uint32_t a = f[k];
      const std::uint32_t b = f[(k + 1) % 3];
      if (directed.contains(edge_key(b, a))) {
        continue;
      }
      if (!on_plane[a] || !on_plane[b]) {
        throw Error(ErrorCode::kNonWatertight, "mesh boundary edge away from the cutting plane");
      }
      cap_edges.emplace_back(b, a);
    }
  }
  if (cap_edges.empty()) {
    return;
  }

  const auto [u, v] = plane_basis(cap_normal);
  std::unordered_map<std::uint32_t, std::size_t> local;
  std::vector<std::uint32_t> global;
  std::vector<Vec2> points;
  auto local_index = [&](std::uint32_t g) {
    auto [it, inserted] = local.try_emplace(g, global.size());
    if (inserted) {
      global.push_back(g);
      points.push_back({dot(vertices[g], u), dot(vertices[g], v)});
    }
    return it->second;
  };

  std::unordered_map<std::size_t, std::vector<std::size_t>> outgoing;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(cap_edges.size());
  for (const auto& [a, b] : cap_edges) {
    const std::size_t la = local_index(a);
    const std::size_t lb = local_index(b);
    outgoing[la].push_back(edges.size());
    edges.emplace_back(la, lb);
  }

  std::vector<char> used(edges.size(), 0);
  std::vector<Loop> loops;
  for (std::size_t first = 0; first < edges.size(); ++first) {
    if (used[first]) {
      continue;
    }
    Loop loop;
    std::size_t current = first;
    used[current] = 1;
    const std::size_t start = edges[current].first;
    loop.push_back(start);
    for (std::size_t guard = 0; guard <= edges.size(); ++guard) {
      const auto [from, to] = edges[current];
      if (to == start) {
        break;
      }
      loop.push_back(to);
      const std::vector<std::size_t>& options = outgoing[to];
      std::size_t next = edges.size();
      double best_turn = -std::numeric_limits<double>::infinity();
      const Vec2 incoming = points[to] - points[from];
      for (std::size_t e : options) {
        if (used[e]) {
          continue;
        }
        const Vec2 out = points[edges[e].second] - points[to];
        const double turn = std::atan2(cross2(incoming, out), dot2(incoming, out));
        if (turn > best_turn) {
          best_turn = turn;
          next = e;
        }
      }
      if (next == edges.size()) {
        throw Error(ErrorCode::kNonWatertight, "cut cross-section does not close");
      }
      used[next] = 1;
      current = next;
    }
    loops.push_back(std::move(loop));
  }

  for (const PolygonWithHoles& polygon : group_loops(points, loops)) {
    for (const auto& tri : triangulate(points, polygon)) {
      faces.push_back({global[tri[0]], global[tri[1]], global[tri[2]]});
    }
  }
}

}  // namespace

Plane Plane::through(const Vec3& origin, const Vec3& normal) {
  const double len = norm(normal);
  if (!is_finite(normal) || !is_finite(origin) || len <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "plane needs a finite, non-zero normal");
  }
  return Plane{origin, normal / len};
}

Bounds bounds(const TriangleMesh& mesh) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Bounds b{{inf, inf, inf}, {-inf, -inf, -inf}};
  for (const Vec3& p : mesh.vertices) {
    b.min = {std::min(b.min.x, p.x), std::min(b.min.y, p.y), std::min(b.min.z, p.z)};
    b.max = {std::max(b.max.x, p.x), std::max(b.max.y, p.y), std::max(b.max.z, p.z)};
  }
  return b;
}

bool is_watertight(const TriangleMesh& mesh) {
  std::unordered_map<std::uint64_t, int> count;
  count.reserve(mesh.faces.size() * 3);
  for (const Face& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      if (f[k] >= mesh.vertices.size()) {
        return false;
      }
      ++count[edge_key(f[k], f[(k + 1) % 3])];
    }
  }
  for (const auto& [key, n] : count) {
    if (n != 1) {
      return false;
    }
    const auto a = static_cast<std::uint32_t>(key >> 32);
    const auto b = static_cast<std::uint32_t>(key & 0xffffffffu);
    auto twin = count.find(edge_key(b, a));
    if (twin == count.end() || twin->second != 1) {
      return false;
    }
  }
  return true;
}

void check_watertight(const TriangleMesh& mesh) {
  if (mesh.faces.empty()) {
    throw Error(ErrorCode::kNonWatertight, "mesh has no faces");
  }
  if (!is_watertight(mesh)) {
    throw Error(ErrorCode::kNonWatertight,
                "every edge must be shared by exactly two consistently oriented faces");
  }
}

double signed_volume(const TriangleMesh& mesh) {
  double six_v = 0.0;
  for (const Face& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    six_v += dot(a, cross(b, c));
  }
  return six_v / 6.0;
}

double mesh_volume(const TriangleMesh& mesh) {
  check_watertight(mesh);
  return signed_volume(mesh);
}

Vec3 volume_centroid(const TriangleMesh& mesh) {
  double six_v = 0.0;
  Vec3 acc;
  for (const Face& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    const double w = dot(a, cross(b, c));
    six_v += w;
    acc += (a + b + c) * w;
  }
  if (std::abs(six_v) > 1e-300) {
    return acc / (4.0 * six_v);
  }
  Vec3 mean;
  for (const Vec3& p : mesh.vertices) {
    mean += p;
  }
  return mesh.vertices.empty() ? mean : mean / static_cast<double>(mesh.vertices.size());
}

SplitResult split_mesh(const TriangleMesh& mesh, const Plane& plane) {
  require_unit(plane.normal);
  if (mesh.faces.empty()) {
    return {};
  }

  const std::size_t nv = mesh.vertices.size();
  std::vector<Vec3> vertices = mesh.vertices;
  std::vector<double> dist(nv);
  std::vector<char> on_plane(nv, 0);
  bool has_negative = false;
  bool has_positive = false;
  for (std::size_t i = 0; i < nv; ++i) {
    double d = signed_distance(plane, vertices[i]);
    if (std::abs(d) < kPlaneSnap) {
      vertices[i] -= plane.normal * d;
      d = 0.0;
      on_plane[i] = 1;
    }
    dist[i] = d;
    has_negative = has_negative || d < 0.0;
    has_positive = has_positive || d > 0.0;
  }
  if (!has_positive) {
    return {mesh, {}};
  }
  if (!has_negative) {
    return {{}, mesh};
  }

  std::unordered_map<std::uint64_t, std::uint32_t> crossings;
  auto crossing = [&](std::uint32_t a, std::uint32_t b) {
    const std::uint32_t lo = std::min(a, b);
    const std::uint32_t hi = std::max(a, b);
    auto [it, inserted] = crossings.try_emplace(edge_key(lo, hi), 0u);
    if (inserted) {
      const double t = dist[lo] / (dist[lo] - dist[hi]);
      it->second = static_cast<std::uint32_t>(vertices.size());
      vertices.push_back(vertices[lo] + (vertices[hi] - vertices[lo]) * t);
      on_plane.push_back(1);
      dist.push_back(0.0);
    }
    return it->second;
  };

  std::vector<Face> negative;
  std::vector<Face> positive;
  std::vector<std::uint32_t> poly;
  auto emit_fan = [](const std::vector<std::uint32_t>& p, std::vector<Face>& out) {
    for (std::size_t k = 1; k + 1 < p.size(); ++k) {
      out.push_back({p[0], p[k], p[k + 1]});
    }
  };

  for (const Face& f : mesh.faces) {
    const double d0 = dist[f[0]];
    const double d1 = dist[f[1]];
    const double d2 = dist[f[2]];
    if (d0 == 0.0 && d1 == 0.0 && d2 == 0.0) {
      const Vec3 n = cross(vertices[f[1]] - vertices[f[0]], vertices[f[2]] - vertices[f[0]]);
      (dot(n, plane.normal) >= 0.0 ? negative : positive).push_back(f);
      continue;
    }
    if (d0 <= 0.0 && d1 <= 0.0 && d2 <= 0.0) {
      negative.push_back(f);
      continue;
    }
    if (d0 >= 0.0 && d1 >= 0.0 && d2 >= 0.0) {
      positive.push_back(f);
      continue;
    }
    for (const int side : {-1, 1}) {
      poly.clear();
      for (int k = 0; k < 3; ++k) {
        const std::uint32_t cur = f[k];
        const std::uint32_t nxt = f[(k + 1) % 3];
        const double dc = dist[cur];
        const double dn = dist[nxt];
        if (side < 0 ? dc <= 0.0 : dc >= 0.0) {
          poly.push_back(cur);
        }
        if ((dc < 0.0 && dn > 0.0) || (dc > 0.0 && dn < 0.0)) {
          poly.push_back(crossing(cur, nxt));
        }
      }
      emit_fan(poly, side < 0 ? negative : positive);
    }
  }

  close_with_cap(vertices, on_plane, negative, plane.normal);
  close_with_cap(vertices, on_plane, positive, -plane.normal);

  SplitResult result{compact(vertices, negative), compact(vertices, positive)};
  for (const TriangleMesh* half : {&result.negative, &result.positive}) {
    if (!half->empty() && signed_volume(*half) < kVolumeEpsilon) {
      throw Error(ErrorCode::kDegenerateCut, "cut leaves a sliver below the volume epsilon");
    }
  }
  return result;
}

std::vector<Vec3> sample_normals(double phi_max, int n_polar, int n_azimuth) {
  if (!std::isfinite(phi_max) || phi_max < 0.0 || phi_max > std::numbers::pi / 2.0 + 1e-12) {
    throw Error(ErrorCode::kInvalidAngle, "polar bound must lie in [0, pi/2]");
  }
  if (n_polar < 1 || n_azimuth < 1) {
    throw Error(ErrorCode::kInvalidArgument, "sampling counts must be positive");
  }
  std::vector<Vec3> normals{{0.0, 0.0, 1.0}};
  if (phi_max == 0.0) {
    return normals;
  }
  normals.reserve(1 + static_cast<std::size_t>(n_polar) * static_cast<std::size_t>(n_azimuth));
  for (int k = 1; k <= n_polar; ++k) {
    const double polar = phi_max * k / n_polar;
    for (int m = 0; m < n_azimuth; ++m) {
      const double azimuth = 2.0 * std::numbers::pi * m / n_azimuth;
      normals.push_back({std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth),
                         std::cos(polar)});
    }
  }
  return normals;
}

std::vector<Plane> plane_family(const Vec3& normal, const TriangleMesh& mesh, double delta) {
  require_unit(normal);
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::kInvalidArgument, "plane spacing must be positive");
  }
  std::vector<Plane> planes;
  if (mesh.vertices.empty()) {
    return planes;
  }
  double d_min = std::numeric_limits<double>::infinity();
  double d_max = -d_min;
  for (const Vec3& p : mesh.vertices) {
    const double d = dot(p, normal);
    d_min = std::min(d_min, d);
    d_max = std::max(d_max, d);
  }
  const Vec3 centroid = volume_centroid(mesh);
  const double c = dot(centroid, normal);
  for (int k = 1;; ++k) {
    const double offset = d_min + k * delta;
    if (offset >= d_max - kPlaneSnap) {
      break;
    }
    planes.push_back({centroid + normal * (offset - c), normal});
  }
  return planes;
}

TriangleMesh translated(const TriangleMesh& mesh, const Vec3& offset) {
  TriangleMesh out = mesh;
  for (Vec3& p : out.vertices) {
    p += offset;
  }
  return out;
}

TriangleMesh scaled(const TriangleMesh& mesh, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorCode::kInvalidArgument, "scale factor must be positive");
  }
  TriangleMesh out = mesh;
  for (Vec3& p : out.vertices) {
    p *= factor;
  }
  return out;
}

TriangleMesh make_box(const Vec3& lo, const Vec3& hi) {
  TriangleMesh m;
  m.vertices = {{lo.x, lo.y, lo.z}, {hi.x, lo.y, lo.z}, {hi.x, hi.y, lo.z}, {lo.x, hi.y, lo.z},
                {lo.x, lo.y, hi.z}, {hi.x, lo.y, hi.z}, {hi.x, hi.y, hi.z}, {lo.x, hi.y, hi.z}};
  m.faces = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7}, {0, 1, 5}, {0, 5, 4},
             {1, 2, 6}, {1, 6, 5}, {2, 3, 7}, {2, 7, 6}, {3, 0, 4}, {3, 4, 7}};
  return m;
}

TriangleMesh make_hollow_rectangle(double width, double length, double height, double wall) {
  if (!(width > 2.0 * wall) || !(length > 2.0 * wall) || !(height > 0.0) || !(wall > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "hollow rectangle dimensions are inconsistent");
  }
  const double ox = width / 2.0;
  const double oy = length / 2.0;
  const double ix = ox - wall;
  const double iy = oy - wall;
  const std::array<Vec3, 4> outer{{{-ox, -oy, 0.0}, {ox, -oy, 0.0}, {ox, oy, 0.0}, {-ox, oy, 0.0}}};
  const std::array<Vec3, 4> inner{{{-ix, -iy, 0.0}, {ix, -iy, 0.0}, {ix, iy, 0.0}, {-ix, iy, 0.0}}};

  TriangleMesh m;
  const Vec3 up{0.0, 0.0, height};
  for (const Vec3& p : outer) m.vertices.push_back(p);       // 0..3 outer bottom
  for (const Vec3& p : outer) m.vertices.push_back(p + up);  // 4..7 outer top
  for (const Vec3& p : inner) m.vertices.push_back(p);       // 8..11 inner bottom
  for (const Vec3& p : inner) m.vertices.push_back(p + up);  // 12..15 inner top

  auto quad = [&m](std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
    m.faces.push_back({a, b, c});
    m.faces.push_back({a, c, d});
  };
  for (std::uint32_t k = 0; k < 4; ++k) {
    const std::uint32_t n = (k + 1) % 4;
    quad(k, n, 4 + n, 4 + k);                // outer wall
    quad(8 + n, 8 + k, 12 + k, 12 + n);      // inner wall, facing the void
    quad(4 + k, 4 + n, 12 + n, 12 + k);      // top
    quad(k, 8 + k, 8 + n, n);                // bottom
  }
  return m;
}

}  // namespace aeroprint
