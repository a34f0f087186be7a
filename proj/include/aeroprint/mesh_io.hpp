#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "aeroprint/geometry.hpp"

namespace aeroprint {

/// Reads binary or ASCII STL. Coincident corners are welded by exact
/// float equality, which is how STL writers emit shared vertices.
/// Coordinates are multiplied by `scale` (input assumed in meters).
TriangleMesh read_stl(const std::filesystem::path& path, double scale = 1.0);
TriangleMesh parse_stl(const std::string& bytes, double scale = 1.0);

/// Minimal Wavefront OBJ: `v` and triangular or polygonal `f` records.
TriangleMesh read_obj(const std::filesystem::path& path, double scale = 1.0);

/// Dispatches on the extension (.stl / .obj).
TriangleMesh read_mesh(const std::filesystem::path& path, double scale = 1.0);

void write_obj(std::ostream& out, const TriangleMesh& mesh);
void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh);
void write_stl_binary(const std::filesystem::path& path, const TriangleMesh& mesh);
std::string format_stl_ascii(const TriangleMesh& mesh, const std::string& name = "mesh");

}  // namespace aeroprint
