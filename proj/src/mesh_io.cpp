#include "aeroprint/mesh_io.hpp"

#include <fmt/format.h>

#include <array>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "aeroprint/error.hpp"

namespace aeroprint {
namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "mesh not found: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

class Welder {
 public:
  explicit Welder(double scale) : scale_(scale) {}

  std::uint32_t index(const std::array<float, 3>& p) {
    auto [it, inserted] = ids_.try_emplace(p, static_cast<std::uint32_t>(mesh_.vertices.size()));
    if (inserted) {
      mesh_.vertices.push_back({p[0] * scale_, p[1] * scale_, p[2] * scale_});
    }
    return it->second;
  }

  void add(const std::array<std::array<float, 3>, 3>& tri) {
    const Face f{index(tri[0]), index(tri[1]), index(tri[2])};
    // zero-area facets from collapsed corners carry no surface
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      return;
    }
    mesh_.faces.push_back(f);
  }

  TriangleMesh take() { return std::move(mesh_); }

 private:
  double scale_;
  std::map<std::array<float, 3>, std::uint32_t> ids_;
  TriangleMesh mesh_;
};

float read_le_float(const char* p) {
  std::uint32_t bits = 0;
  for (int k = 3; k >= 0; --k) {
    bits = (bits << 8) | static_cast<unsigned char>(p[k]);
  }
  return std::bit_cast<float>(bits);
}

std::uint32_t read_le_u32(const char* p) {
  std::uint32_t v = 0;
  for (int k = 3; k >= 0; --k) {
    v = (v << 8) | static_cast<unsigned char>(p[k]);
  }
  return v;
}

void put_le(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) {
    out.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
  }
}

bool looks_binary(const std::string& bytes) {
  if (bytes.size() < 84) {
    return false;
  }
  const std::uint64_t n = read_le_u32(bytes.data() + 80);
  return bytes.size() == 84 + 50 * n;
}

TriangleMesh parse_binary(const std::string& bytes, double scale) {
  const std::uint32_t n = read_le_u32(bytes.data() + 80);
  Welder welder(scale);
  for (std::uint32_t i = 0; i < n; ++i) {
    const char* rec = bytes.data() + 84 + 50 * static_cast<std::size_t>(i) + 12;
    std::array<std::array<float, 3>, 3> tri{};
    for (int c = 0; c < 3; ++c) {
      for (int a = 0; a < 3; ++a) {
        tri[c][a] = read_le_float(rec + 12 * c + 4 * a);
      }
    }
    welder.add(tri);
  }
  return welder.take();
}

TriangleMesh parse_ascii(const std::string& text, double scale) {
  std::istringstream in(text);
  std::string word;
  in >> word;
  if (word != "solid") {
    throw Error(ErrorCode::kParseError, "STL: neither binary nor ASCII");
  }
  Welder welder(scale);
  std::array<std::array<float, 3>, 3> tri{};
  int corner = 0;
  while (in >> word) {
    if (word == "vertex") {
      if (corner >= 3) {
        throw Error(ErrorCode::kParseError, "STL: facet with more than 3 vertices");
      }
      double x = 0, y = 0, z = 0;
      if (!(in >> x >> y >> z)) {
        throw Error(ErrorCode::kParseError, "STL: malformed vertex");
      }
      tri[corner++] = {static_cast<float>(x), static_cast<float>(y), static_cast<float>(z)};
    } else if (word == "endfacet") {
      if (corner != 3) {
        throw Error(ErrorCode::kParseError, "STL: facet without 3 vertices");
      }
      welder.add(tri);
      corner = 0;
    }
  }
  return welder.take();
}

}  // namespace

TriangleMesh parse_stl(const std::string& bytes, double scale) {
  if (!(scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "scale must be positive");
  }
  TriangleMesh mesh = looks_binary(bytes) ? parse_binary(bytes, scale) : parse_ascii(bytes, scale);
  if (mesh.empty()) {
    throw Error(ErrorCode::kEmptyInput, "STL contains no facets");
  }
  return mesh;
}

TriangleMesh read_stl(const std::filesystem::path& path, double scale) {
  return parse_stl(slurp(path), scale);
}

TriangleMesh read_obj(const std::filesystem::path& path, double scale) {
  if (!(scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "scale must be positive");
  }
  std::istringstream in(slurp(path));
  TriangleMesh mesh;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x >> p.y >> p.z)) {
        throw Error(ErrorCode::kParseError, fmt::format("OBJ line {}: malformed vertex", line_no));
      }
      mesh.vertices.push_back(p * scale);
    } else if (tag == "f") {
      std::vector<std::uint32_t> poly;
      std::string tok;
      while (ls >> tok) {
        const long idx = std::stol(tok.substr(0, tok.find('/')));
        const long resolved = idx < 0 ? static_cast<long>(mesh.vertices.size()) + idx : idx - 1;
        if (resolved < 0 || resolved >= static_cast<long>(mesh.vertices.size())) {
          throw Error(ErrorCode::kParseError, fmt::format("OBJ line {}: bad index", line_no));
        }
        poly.push_back(static_cast<std::uint32_t>(resolved));
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
      }
    }
  }
  if (mesh.empty()) {
    throw Error(ErrorCode::kEmptyInput, "OBJ contains no faces");
  }
  return mesh;
}

TriangleMesh read_mesh(const std::filesystem::path& path, double scale) {
  std::string ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".obj") {
    return read_obj(path, scale);
  }
  return read_stl(path, scale);
}

void write_obj(std::ostream& out, const TriangleMesh& mesh) {
  for (const Vec3& v : mesh.vertices) {
    out << fmt::format("v {:.17g} {:.17g} {:.17g}\n", v.x, v.y, v.z);
  }
  for (const Face& f : mesh.faces) {
    out << fmt::format("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1);
  }
}

void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
  write_obj(out, mesh);
}

void write_stl_binary(const std::filesystem::path& path, const TriangleMesh& mesh) {
  std::string bytes(80, '\0');
  put_le(bytes, static_cast<std::uint32_t>(mesh.faces.size()));
  for (const Face& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    Vec3 n = cross(b - a, c - a);
    const double len = norm(n);
    n = len > 0 ? n / len : Vec3{};
    for (const Vec3& p : {n, a, b, c}) {
      for (double coord : {p.x, p.y, p.z}) {
        put_le(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(coord)));
      }
    }
    bytes.append(2, '\0');
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string format_stl_ascii(const TriangleMesh& mesh, const std::string& name) {
  std::string out = fmt::format("solid {}\n", name);
  for (const Face& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    Vec3 n = cross(b - a, c - a);
    const double len = norm(n);
    n = len > 0 ? n / len : Vec3{};
    out += fmt::format("  facet normal {:.9g} {:.9g} {:.9g}\n    outer loop\n", n.x, n.y, n.z);
    for (const Vec3* p : {&a, &b, &c}) {
      out += fmt::format("      vertex {:.9g} {:.9g} {:.9g}\n", p->x, p->y, p->z);
    }
    out += "    endloop\n  endfacet\n";
  }
  out += fmt::format("endsolid {}\n", name);
  return out;
}

}  // namespace aeroprint
