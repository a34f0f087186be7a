#include "aeroprint/json_io.hpp"

#include <fmt/format.h>

#include <fstream>

#include "aeroprint/error.hpp"

namespace aeroprint {
namespace {

using nlohmann::json;

json node_json(const BspNode& node) {
  if (node.is_leaf()) {
    json faces = json::array();
    for (const CutFace& f : node.chunk->cut_faces) {
      faces.push_back({{"plane", f.plane_id},
                       {"side", f.side == Side::kPositive ? "positive" : "negative"}});
    }
    return {{"chunk", node.chunk->id}, {"volume", node.chunk->volume}, {"cut_faces", faces}};
  }
  return {{"plane", *node.plane}, {"left", node_json(*node.left)}, {"right", node_json(*node.right)}};
}

json axis_json(const AxisStats& s) {
  return {{"max", to_json(s.max)}, {"mean", to_json(s.mean)}, {"samples", s.samples}};
}

}  // namespace

json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json tree_json(const BspTree& tree) {
  json planes = json::array();
  for (const auto& [id, p] : tree.planes()) {
    planes.push_back({{"id", id}, {"origin", to_json(p.origin)}, {"normal", to_json(p.normal)}});
  }
  return {{"planes", planes},
          {"leaf_count", tree.leaf_count()},
          {"root_volume", tree.root_volume()},
          {"root", node_json(tree.root())}};
}

json order_json(const std::vector<ChunkId>& order) { return {{"order", order}}; }

json audit_json(const SearchResult& r) {
  json iterations = json::array();
  for (const IterationAudit& it : r.audit) {
    json beam = json::array();
    for (const BeamAuditEntry& e : it.beam) {
      beam.push_back({{"planes", e.planes},
                      {"heuristic", e.heuristic},
                      {"leaves", e.leaves},
                      {"terminated", e.terminated}});
    }
    iterations.push_back({{"iteration", it.iteration}, {"expanded", it.expanded}, {"beam", beam}});
  }
  return {{"heuristic", r.heuristic},
          {"terminated", r.terminated},
          {"iterations_used", r.iterations_used},
          {"iterations", iterations}};
}

json events_json(const std::vector<ScheduleEvent>& events) {
  json out = json::array();
  for (const ScheduleEvent& e : events) {
    out.push_back({{"t", e.t},
                   {"kind", to_string(e.kind)},
                   {"agent", e.agent},
                   {"chunk", e.chunk},
                   {"battery", e.battery}});
  }
  return out;
}

json markers_json(const std::vector<DepositedMarker>& markers) {
  json out = json::array();
  for (const DepositedMarker& m : markers) {
    out.push_back({{"center", to_json(m.center)}, {"radius", m.radius}, {"chunk", m.chunk_id}, {"t", m.t}});
  }
  return out;
}

json stats_json(const TrackingReport& r) {
  json by_chunk = json::object();
  for (const auto& [id, s] : r.uav_steady_by_chunk) by_chunk[std::to_string(id)] = axis_json(s);
  return {{"uav", axis_json(r.uav)},
          {"extruder", axis_json(r.extruder)},
          {"uav_steady", axis_json(r.uav_steady)},
          {"extruder_steady", axis_json(r.extruder_steady)},
          {"uav_steady_by_chunk", by_chunk},
          {"duration", r.duration},
          {"chunks", r.chunks},
          {"markers", r.markers}};
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::kIo, fmt::format("cannot write {}", path.string()));
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw Error(ErrorCode::kIo, fmt::format("write failed: {}", path.string()));
  }
}

}  // namespace aeroprint
