#include "aeroprint/toolpath.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <iterator>
#include <map>
#include <sstream>
#include <unordered_map>

#include "aeroprint/error.hpp"

namespace aeroprint {
namespace {

constexpr double kMm = 1e-3;

struct Word {
  char letter;
  double value;
};

[[noreturn]] void parse_error(int line, const std::string& why) {
  throw Error(ErrorCode::kParseError, fmt::format("line {}: {}", line, why));
}

[[noreturn]] void unsupported(int line, const std::string& what) {
  throw Error(ErrorCode::kUnsupportedCommand, fmt::format("line {}: {}", line, what));
}

std::vector<Word> tokenize(std::string_view text, int line) {
  std::vector<Word> words;
  std::size_t i = 0;
  bool in_paren = false;
  while (i < text.size()) {
    const char c = text[i];
    if (in_paren) {
      in_paren = c != ')';
      ++i;
      continue;
    }
    if (c == ';' || c == '*') {
      break;  // comment or checksum
    }
    if (c == '(') {
      in_paren = true;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) {
      parse_error(line, fmt::format("unexpected '{}'", c));
    }
    const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    ++i;
    std::size_t end = i;
    while (end < text.size() && (std::isdigit(static_cast<unsigned char>(text[end])) ||
                                 text[end] == '.' || text[end] == '-' || text[end] == '+')) {
      ++end;
    }
    std::string_view digits = text.substr(i, end - i);
    if (!digits.empty() && digits.front() == '+') {
      digits.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) {
      parse_error(line, fmt::format("malformed word '{}{}'", letter, text.substr(i, end - i)));
    }
    words.push_back({letter, value});
    i = end;
  }
  return words;
}

int command_number(const Word& w, int line) {
  if (w.value != std::floor(w.value) || w.value < 0) {
    unsupported(line, fmt::format("{}{}", w.letter, w.value));
  }
  return static_cast<int>(w.value);
}

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

void drop_collinear(std::vector<Vec2>& points, Loop& loop) {
  bool changed = true;
  while (changed && loop.size() > 3) {
    changed = false;
    for (std::size_t i = 0; i < loop.size() && loop.size() > 3; ++i) {
      const Vec2 prev = points[loop[(i + loop.size() - 1) % loop.size()]];
      const Vec2 cur = points[loop[i]];
      const Vec2 next = points[loop[(i + 1) % loop.size()]];
      const bool duplicate = std::hypot(cur.x - prev.x, cur.y - prev.y) <= 1e-12;
      const bool straight = distance_to_segment(cur, prev, next) <= 1e-9 &&
                            dot2(cur - prev, next - cur) >= 0.0;
      if (duplicate || straight) {
        loop.erase(loop.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        --i;
      }
    }
  }
}

void emit_loop(PrintPath& path, const CrossSection& cs, const Loop& loop, double z) {
  std::size_t seam = 0;
  for (std::size_t i = 1; i < loop.size(); ++i) {
    const Vec2 p = cs.points[loop[i]];
    const Vec2 s = cs.points[loop[seam]];
    if (p.x < s.x || (p.x == s.x && p.y < s.y)) {
      seam = i;
    }
  }
  const Vec2 start = cs.points[loop[seam]];
  path.waypoints.push_back({{start.x, start.y, z}, false, std::nullopt});
  for (std::size_t j = 1; j <= loop.size(); ++j) {
    const Vec2 p = cs.points[loop[(seam + j) % loop.size()]];
    path.waypoints.push_back({{p.x, p.y, z}, true, std::nullopt});
  }
}

// Scanlines parallel to x (axis 0) or y (axis 1) clipped to the union of
// all loops by even-odd crossing parity.
void emit_infill(PrintPath& path, const CrossSection& cs, double z, double spacing, int axis) {
  auto along = [axis](Vec2 p) { return axis == 0 ? p.x : p.y; };
  auto across = [axis](Vec2 p) { return axis == 0 ? p.y : p.x; };
  auto at = [axis, z](double a, double c) {
    return axis == 0 ? Vec3{a, c, z} : Vec3{c, a, z};
  };

  std::vector<std::pair<Vec2, Vec2>> edges;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const PolygonWithHoles& poly : cs.polygons) {
    auto add = [&](const Loop& loop) {
      for (std::size_t i = 0; i < loop.size(); ++i) {
        const Vec2 a = cs.points[loop[i]];
        edges.emplace_back(a, cs.points[loop[(i + 1) % loop.size()]]);
        lo = std::min(lo, across(a));
        hi = std::max(hi, across(a));
      }
    };
    add(poly.outer);
    for (const Loop& h : poly.holes) add(h);
  }
  if (edges.empty()) {
    return;
  }

  int line = 0;
  for (double c = lo + 0.5 * spacing; c < hi; c = lo + (++line + 0.5) * spacing) {
    std::vector<double> hits;
    for (const auto& [a, b] : edges) {
      if ((across(a) <= c) != (across(b) <= c)) {
        const double t = (c - across(a)) / (across(b) - across(a));
        hits.push_back(along(a) + t * (along(b) - along(a)));
      }
    }
    std::sort(hits.begin(), hits.end());
    std::vector<std::pair<double, double>> spans;
    for (std::size_t i = 0; i + 1 < hits.size(); i += 2) {
      if (hits[i + 1] - hits[i] > 1e-9) {
        spans.emplace_back(hits[i], hits[i + 1]);
      }
    }
    if (line % 2 == 1) {
      std::reverse(spans.begin(), spans.end());
      for (auto& s : spans) std::swap(s.first, s.second);
    }
    for (const auto& [from, to] : spans) {
      path.waypoints.push_back({at(from, c), false, std::nullopt});
      path.waypoints.push_back({at(to, c), true, std::nullopt});
    }
  }
}

}  // namespace

PrintPath parse_gcode(std::string_view text) {
  PrintPath path;
  Vec3 pos{};
  double e = 0.0;
  bool relative_e = false;
  std::optional<double> feed;
  int line_no = 0;

  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(begin, end - begin);
    begin = end + 1;
    ++line_no;

    const std::vector<Word> words = tokenize(line, line_no);
    std::optional<Word> command;
    std::map<char, double> args;
    for (const Word& w : words) {
      if (w.letter == 'G' || w.letter == 'M' || w.letter == 'T') {
        if (command) {
          parse_error(line_no, "more than one command on a line");
        }
        command = w;
      } else if (w.letter != 'N') {
        args[w.letter] = w.value;
      }
    }
    if (!command) {
      if (!args.empty()) {
        parse_error(line_no, "parameters without a command");
      }
      continue;
    }
    const int number = command_number(*command, line_no);
    if (command->letter == 'M') {
      if (number == 82) relative_e = false;
      if (number == 83) relative_e = true;
      continue;
    }
    if (command->letter == 'T') {
      continue;
    }
    switch (number) {
      case 0:
      case 1: {
        for (const auto& [letter, value] : args) {
          switch (letter) {
            case 'X': pos.x = value * kMm; break;
            case 'Y': pos.y = value * kMm; break;
            case 'Z': pos.z = value * kMm; break;
            case 'E': break;
            case 'F':
              if (!(value > 0.0)) parse_error(line_no, "feed must be positive");
              feed = value * kMm / 60.0;
              break;
            default:
              parse_error(line_no, fmt::format("unexpected word {}", letter));
          }
        }
        bool extrude = false;
        if (const auto it = args.find('E'); it != args.end()) {
          const double increment = relative_e ? it->second : it->second - e;
          e = relative_e ? e + it->second : it->second;
          extrude = number == 1 && increment > 0.0;
        }
        path.waypoints.push_back({pos, extrude, feed});
        break;
      }
      case 2:
      case 3:
      case 5:
        unsupported(line_no, fmt::format("arc G{}", number));
      case 20:
        unsupported(line_no, "inch units (G20)");
      case 91:
        unsupported(line_no, "relative positioning (G91)");
      case 92:
        for (const auto& [letter, value] : args) {
          if (letter == 'E') {
            e = value;
          } else {
            unsupported(line_no, fmt::format("G92 on axis {}", letter));
          }
        }
        break;
      default:
        break;  // G4, G21, G28, G90 and similar leave the path alone
    }
  }
  if (path.waypoints.empty()) {
    parse_error(line_no, "no moves");
  }
  return path;
}

PrintPath parse_gcode(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_gcode(std::string_view(buf.str()));
}

std::string serialize_gcode(const PrintPath& path) {
  std::string out = "G21\nG90\nM82\n";
  double e = 0.0;
  std::optional<double> feed;
  Vec3 prev{};
  for (const Waypoint& w : path.waypoints) {
    out += w.extrude ? "G1" : "G0";
    out += fmt::format(" X{:.17g} Y{:.17g} Z{:.17g}", w.position.x / kMm, w.position.y / kMm,
                       w.position.z / kMm);
    if (w.extrude) {
      e += std::max(norm(w.position - prev) / kMm * 0.05, 1e-4);
      out += fmt::format(" E{:.6f}", e);
    }
    if (w.feed && w.feed != feed) {
      out += fmt::format(" F{:.17g}", *w.feed * 60.0 / kMm);
      feed = w.feed;
    }
    out += '\n';
    prev = w.position;
  }
  return out;
}

void SlicerParams::validate() const {
  if (!(std::isfinite(layer_height) && layer_height > 0.0)) {
    throw Error(ErrorCode::kConfig, "slicer.layer_height: must be > 0");
  }
  if (!(std::isfinite(line_spacing) && line_spacing > 0.0)) {
    throw Error(ErrorCode::kConfig, "slicer.line_spacing: must be > 0");
  }
}

CrossSection cross_section(const TriangleMesh& mesh, double z) {
  CrossSection cs;
  const auto& v = mesh.vertices;
  std::vector<char> above(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) above[i] = v[i].z - z >= 0.0;

  std::unordered_map<std::uint64_t, std::size_t> point_of_edge;
  auto crossing = [&](std::uint32_t a, std::uint32_t b) {
    const auto [it, inserted] = point_of_edge.try_emplace(edge_key(a, b), cs.points.size());
    if (inserted) {
      const Vec3& p = v[std::min(a, b)];
      const Vec3& q = v[std::max(a, b)];
      const double t = (z - p.z) / (q.z - p.z);
      cs.points.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
    }
    return it->second;
  };

  // Walking a face in winding order, the segment runs from the edge that
  // descends through z to the edge that rises through it; this keeps
  // material on the left of every chain.
  std::unordered_map<std::size_t, std::size_t> next;
  std::vector<std::size_t> starts;
  for (const Face& f : mesh.faces) {
    std::optional<std::size_t> down;
    std::optional<std::size_t> up;
    for (int k = 0; k < 3; ++k) {
      const std::uint32_t a = f[k];
      const std::uint32_t b = f[(k + 1) % 3];
      if (above[a] && !above[b]) down = crossing(a, b);
      if (!above[a] && above[b]) up = crossing(a, b);
    }
    if (down && up) {
      if (!next.emplace(*down, *up).second) {
        throw Error(ErrorCode::kNonWatertight, "cross-section edge used twice");
      }
      starts.push_back(*down);
    }
  }

  std::vector<Loop> loops;
  std::vector<char> used(cs.points.size(), 0);
  for (std::size_t s : starts) {
    if (used[s]) continue;
    Loop loop;
    std::size_t cur = s;
    while (!used[cur]) {
      used[cur] = 1;
      loop.push_back(cur);
      const auto it = next.find(cur);
      if (it == next.end()) {
        throw Error(ErrorCode::kNonWatertight, "open cross-section");
      }
      cur = it->second;
    }
    if (cur != s) {
      throw Error(ErrorCode::kNonWatertight, "cross-section chains do not close");
    }
    drop_collinear(cs.points, loop);
    loops.push_back(std::move(loop));
  }
  cs.polygons = group_loops(cs.points, loops);
  return cs;
}

PrintPath slice_chunk(const TriangleMesh& mesh, double layer_height, double line_spacing) {
  SlicerParams{layer_height, line_spacing}.validate();
  const Bounds b = bounds(mesh);
  if (b.max.z - b.min.z < layer_height) {
    throw Error(ErrorCode::kEmptySlice,
                fmt::format("mesh height {:.6g} m is below one layer", b.max.z - b.min.z));
  }
  PrintPath path;
  for (int k = 0;; ++k) {
    const double z = b.min.z + (k + 0.5) * layer_height;
    if (z >= b.max.z) break;
    const CrossSection cs = cross_section(mesh, z);
    if (cs.polygons.empty()) continue;
    for (const PolygonWithHoles& poly : cs.polygons) {
      emit_loop(path, cs, poly.outer, z);
      for (const Loop& h : poly.holes) emit_loop(path, cs, h, z);
    }
    emit_infill(path, cs, z, line_spacing, k % 2);
  }
  if (path.waypoints.empty()) {
    throw Error(ErrorCode::kEmptySlice, "no layer has a cross-section");
  }
  return path;
}

PrintPath slice_chunk(const TriangleMesh& mesh, const SlicerParams& params) {
  return slice_chunk(mesh, params.layer_height, params.line_spacing);
}

PrintPath extruder_to_uav(const PrintPath& path, double l_ex) {
  if (!(std::isfinite(l_ex) && l_ex > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "extruder length must be > 0");
  }
  if (path.frame != PathFrame::kExtruderTip) {
    throw Error(ErrorCode::kInvalidArgument, "path is not in the extruder frame");
  }
  PrintPath out = path;
  out.frame = PathFrame::kUavBody;
  for (Waypoint& w : out.waypoints) w.position.z += l_ex;
  return out;
}

double extruded_length(const PrintPath& path, const std::optional<Vec3>& start) {
  double total = 0.0;
  for (std::size_t i = 0; i < path.waypoints.size(); ++i) {
    const Waypoint& w = path.waypoints[i];
    if (!w.extrude) continue;
    if (i > 0) {
      total += norm(w.position - path.waypoints[i - 1].position);
    } else if (start) {
      total += norm(w.position - *start);
    }
  }
  return total;
}

double path_length(const PrintPath& path) {
  double total = 0.0;
  for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
    total += norm(path.waypoints[i].position - path.waypoints[i - 1].position);
  }
  return total;
}

std::string path_csv(const PrintPath& path) {
  std::string out = "x,y,z,extrude\n";
  for (const Waypoint& w : path.waypoints) {
    out += fmt::format("{:.17g},{:.17g},{:.17g},{}\n", w.position.x, w.position.y, w.position.z,
                       w.extrude ? 1 : 0);
  }
  return out;
}

}  // namespace aeroprint
