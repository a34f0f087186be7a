#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "aeroprint/vec3.hpp"

namespace aeroprint {

/// Vertices lying closer than this to a cutting plane are snapped onto it.
inline constexpr double kPlaneSnap = 1e-9;
/// Split outputs below this volume (m^3) are slivers.
inline constexpr double kVolumeEpsilon = 1e-9;

using Face = std::array<std::uint32_t, 3>;

/// Indexed triangle surface in meters. Faces wind counter-clockwise when
/// seen from outside.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  bool empty() const { return faces.empty(); }
  friend bool operator==(const TriangleMesh&, const TriangleMesh&) = default;
};

struct Plane {
  Vec3 origin;
  Vec3 normal;  // unit length

  /// Builds a plane, normalizing `normal`. Throws InvalidArgument for a
  /// zero or non-finite normal.
  static Plane through(const Vec3& origin, const Vec3& normal);

  friend bool operator==(const Plane&, const Plane&) = default;
};

struct Bounds {
  Vec3 min;
  Vec3 max;
};

/// (point - origin) . normal; negative on the side opposite the normal.
constexpr double signed_distance(const Plane& plane, const Vec3& point) {
  return dot(point - plane.origin, plane.normal);
}

Bounds bounds(const TriangleMesh& mesh);

/// Every directed edge must appear exactly once together with its reverse,
/// i.e. each undirected edge is shared by exactly two consistently oriented
/// faces. Throws NonWatertight otherwise.
void check_watertight(const TriangleMesh& mesh);
bool is_watertight(const TriangleMesh& mesh);

/// Signed-tetrahedron sum without topology validation.
double signed_volume(const TriangleMesh& mesh);

/// Enclosed volume of a closed, outward-oriented mesh. Validates topology.
double mesh_volume(const TriangleMesh& mesh);

/// Centroid of the enclosed solid (falls back to the vertex mean for
/// zero-volume input).
Vec3 volume_centroid(const TriangleMesh& mesh);

struct SplitResult {
  TriangleMesh negative;
  TriangleMesh positive;
};

/// Clips `mesh` against `plane` and closes both halves with cap
/// triangulations. The positive half lies on the side the normal points
/// to. A half that the plane does not reach is returned empty.
///
/// Faces lying in the plane go to the half their solid belongs to: a face
/// whose outward normal agrees with the plane normal bounds material below
/// the plane, so it stays with the negative half.
///
/// Throws DegenerateCut when a non-empty half encloses less than
/// kVolumeEpsilon, NonWatertight when the input is open along the cut.
SplitResult split_mesh(const TriangleMesh& mesh, const Plane& plane);

/// Candidate cut normals: the vertical (0,0,1) followed by `n_polar` rings
/// of `n_azimuth` normals at polar angles k*phi_max/n_polar. A zero
/// `phi_max` collapses every ring onto the pole and yields only (0,0,1).
std::vector<Vec3> sample_normals(double phi_max, int n_polar, int n_azimuth);

/// Parallel planes with the given normal, spaced `delta` apart starting at
/// the lowest vertex projection and strictly inside the mesh extent. Plane
/// origins lie on the normal axis through the mesh's volume centroid.
std::vector<Plane> plane_family(const Vec3& normal, const TriangleMesh& mesh, double delta);

TriangleMesh translated(const TriangleMesh& mesh, const Vec3& offset);
TriangleMesh scaled(const TriangleMesh& mesh, double factor);

/// Axis-aligned box, 12 triangles.
TriangleMesh make_box(const Vec3& min, const Vec3& max);

/// Rectangular wall frame centered on the z axis, standing on z = 0: outer
/// footprint `width` x `length`, walls `wall` thick, open at top and bottom.
TriangleMesh make_hollow_rectangle(double width = 2.0, double length = 2.0, double height = 0.5,
                                   double wall = 0.1);

}  // namespace aeroprint
