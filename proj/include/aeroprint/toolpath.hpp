#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aeroprint/bsp_tree.hpp"
#include "aeroprint/geometry.hpp"
#include "aeroprint/polygon.hpp"

namespace aeroprint {

enum class PathFrame { kExtruderTip, kUavBody };

/// Target of one straight move. `extrude` says whether material flows on
/// the way to this point.
struct Waypoint {
  Vec3 position;
  bool extrude = false;
  std::optional<double> feed;  // m/s
  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

struct PrintPath {
  std::vector<Waypoint> waypoints;
  PathFrame frame = PathFrame::kExtruderTip;
  ChunkId chunk_id = 0;
  friend bool operator==(const PrintPath&, const PrintPath&) = default;
};

/// G0/G1 subset in millimetres with absolute XYZ. E is absolute unless M83
/// selects relative extrusion; G92 E resets the extruder axis. Arcs, inch
/// units, relative XYZ and G92 on XYZ raise UnsupportedCommand.
PrintPath parse_gcode(std::string_view text);
PrintPath parse_gcode(std::istream& in);

/// Emits G-code that parse_gcode maps back onto the same path.
std::string serialize_gcode(const PrintPath& path);

struct SlicerParams {
  double layer_height = 0.05;  // m
  double line_spacing = 0.05;  // m
  void validate() const;
  friend bool operator==(const SlicerParams&, const SlicerParams&) = default;
};

/// Closed cross-section of a watertight mesh at height z. Outer loops are
/// counter-clockwise seen from +z, holes clockwise; collinear vertices are
/// dropped.
struct CrossSection {
  std::vector<Vec2> points;
  std::vector<PolygonWithHoles> polygons;
};
CrossSection cross_section(const TriangleMesh& mesh, double z);

/// Per layer: one perimeter per loop, seam at the lexicographically
/// smallest vertex, then scanline infill alternating between x-parallel
/// (even layers) and y-parallel (odd layers) lines. Throws EmptySlice when
/// the mesh is thinner than one layer or no layer has a cross-section.
PrintPath slice_chunk(const TriangleMesh& mesh, double layer_height, double line_spacing);
PrintPath slice_chunk(const TriangleMesh& mesh, const SlicerParams& params);

/// Shifts every waypoint up by the extruder length.
PrintPath extruder_to_uav(const PrintPath& path, double l_ex);

/// Summed length of extruding moves. The first waypoint's move starts at
/// `start` when given, otherwise it contributes nothing.
double extruded_length(const PrintPath& path, const std::optional<Vec3>& start = std::nullopt);
double path_length(const PrintPath& path);

/// x,y,z,extrude rows with a header.
std::string path_csv(const PrintPath& path);

}  // namespace aeroprint
