#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "aeroprint/config.hpp"
#include "aeroprint/error.hpp"
#include "aeroprint/json_io.hpp"
#include "aeroprint/mesh_io.hpp"
#include "aeroprint/mission_emulator.hpp"

namespace fs = std::filesystem;
using namespace aeroprint;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string mesh;
  std::string out;
  std::string trace;
  std::optional<std::uint64_t> seed;
  std::optional<double> scale;
  bool dry_run = false;
};

std::string_view module_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonWatertight:
    case ErrorCode::kDegenerateCut:
    case ErrorCode::kInvalidAngle:
      return "geometry";
    case ErrorCode::kNoEffect:
    case ErrorCode::kUnknownPlane:
      return "bsp_tree";
    case ErrorCode::kEmptyInput:
    case ErrorCode::kSearchExhausted:
      return "chunk_search";
    case ErrorCode::kParseError:
    case ErrorCode::kUnsupportedCommand:
    case ErrorCode::kEmptySlice:
      return "toolpath";
    case ErrorCode::kNoCapableAgent:
    case ErrorCode::kNotActive:
      return "task_allocation";
    case ErrorCode::kNonFinite:
    case ErrorCode::kPathComplete:
      return "flight_control";
    case ErrorCode::kEmptyLog:
    case ErrorCode::kTrackingTimeout:
      return "mission_emulator";
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kIo:
    case ErrorCode::kConfig:
      break;
  }
  return "cli";
}

RunConfig effective_config(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (!o.mesh.empty()) c.mesh = o.mesh;
  if (!o.out.empty()) c.out_dir = o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.scale) c.scale = *o.scale;
  c.validate();
  return c;
}

fs::path prepare_out(const RunConfig& c) {
  const fs::path out = c.out_dir;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    throw Error(ErrorCode::kIo, fmt::format("cannot create {}: {}", out.string(), ec.message()));
  }
  write_json(out / "config.json", to_json(c));
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write {}", path.string()));
}

SearchResult run_search(const RunConfig& c, const fs::path& out) {
  const MissionInputs in = mission_inputs(c);
  SearchResult r = beam_search(in.mesh, in.search);
  write_json(out / "audit.json", audit_json(r));
  require_terminated(r);
  write_json(out / "tree.json", tree_json(r.tree));
  write_json(out / "order.json", order_json(in_order_priority(r.tree)));
  fs::create_directories(out / "chunks");
  for (const auto& leaf : r.tree.leaves()) {
    write_obj(out / "chunks" / fmt::format("chunk_{}.obj", leaf->id), leaf->mesh);
  }
  fmt::print("decomposition: {} planes, {} chunks, h = {:.6g}, {} iterations\n",
             r.tree.planes().size(), r.tree.leaf_count(), r.heuristic, r.iterations_used);
  return r;
}

// Tip-frame paths of every chunk that slices; thin chunks map to nullopt.
std::map<ChunkId, std::optional<PrintPath>> slice_all(const RunConfig& c, const BspTree& tree,
                                                      const fs::path& out) {
  std::map<ChunkId, std::optional<PrintPath>> paths;
  fs::create_directories(out / "gcode");
  for (const auto& leaf : tree.leaves()) {
    try {
      PrintPath p = slice_chunk(leaf->mesh, c.slicer);
      p.chunk_id = leaf->id;
      write_text(out / "gcode" / fmt::format("chunk_{}.gcode", leaf->id), serialize_gcode(p));
      paths[leaf->id] = std::move(p);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptySlice) throw;
      fmt::print("chunk {}: no toolpath ({})\n", leaf->id, e.what());
      paths[leaf->id] = std::nullopt;
    }
  }
  return paths;
}

int cmd_chunk(const RunConfig& c) {
  run_search(c, prepare_out(c));
  return 0;
}

int cmd_slice(const RunConfig& c) {
  const fs::path out = prepare_out(c);
  const SearchResult r = run_search(c, out);
  const auto paths = slice_all(c, r.tree, out);
  for (const auto& [id, p] : paths) {
    if (p) {
      fmt::print("chunk {}: {} waypoints, {:.3f} m extruded, {:.3f} m total\n", id,
                 p->waypoints.size(), extruded_length(*p), path_length(*p));
    }
  }
  return 0;
}

// Dry schedule: battery drain estimated from the planned body-frame path
// plus the transit from where the agent last stopped.
int cmd_plan(const RunConfig& c) {
  const fs::path out = prepare_out(c);
  const SearchResult r = run_search(c, out);
  const auto paths = slice_all(c, r.tree, out);

  std::vector<UavAgent> agents = make_agents(c);
  std::map<AgentId, Vec3> position;
  for (std::size_t i = 0; i < agents.size(); ++i) position[agents[i].id] = home_position(i);
  std::map<ChunkId, double> volumes;
  for (const auto& leaf : r.tree.leaves()) volumes[leaf->id] = leaf->volume;

  PrintSchedule schedule = build_schedule(r.tree);
  json chunks = json::array();
  while (const auto a = assign_next(schedule, agents, volumes)) {
    double flown = 0.0;
    const auto& p = paths.at(a->chunk);
    if (p) {
      const PrintPath body = extruder_to_uav(*p, c.mission.l_ex);
      flown = norm(body.waypoints.front().position - position[a->agent]) + path_length(body);
      position[a->agent] = body.waypoints.back().position;
    }
    complete(schedule, agents, a->agent, a->chunk, flown * c.mission.battery_rate,
             c.mission.battery_threshold);
    chunks.push_back({{"chunk", a->chunk},
                      {"agent", a->agent},
                      {"volume", volumes[a->chunk]},
                      {"flight_length", flown},
                      {"extruded_length", p ? extruded_length(*p) : 0.0},
                      {"sliced", p.has_value()}});
  }
  write_json(out / "plan.json", {{"order", in_order_priority(r.tree)},
                                 {"chunks", chunks},
                                 {"events", events_json(schedule.log)}});
  fmt::print("plan: {} chunks scheduled\n", chunks.size());
  return 0;
}

void print_report(const TrackingReport& r) {
  fmt::print("{:<22}{:>10}{:>10}{:>10}\n", "max |error| (m)", "x", "y", "z");
  auto row = [](const char* name, const Vec3& v) {
    fmt::print("{:<22}{:>10.4f}{:>10.4f}{:>10.4f}\n", name, v.x, v.y, v.z);
  };
  row("uav steady", r.uav_steady.max);
  row("extruder steady", r.extruder_steady.max);
  row("uav all", r.uav.max);
  row("extruder all", r.extruder.max);
  fmt::print("chunks flown: {}   markers: {}   duration: {:.2f} s\n", r.chunks, r.markers,
             r.duration);
}

int cmd_simulate(const RunConfig& c) {
  const fs::path out = prepare_out(c);
  const MissionResult m = run_mission(mission_inputs(c));
  write_json(out / "audit.json", audit_json(m.search));
  write_json(out / "tree.json", tree_json(m.search.tree));
  write_json(out / "order.json", order_json(m.order));
  {
    std::ofstream trace(out / "trace.csv", std::ios::binary);
    write_trace(trace, m.log);
    if (!trace) throw Error(ErrorCode::kIo, "cannot write trace.csv");
  }
  write_json(out / "markers.json", markers_json(m.log.markers));
  write_json(out / "events.json", events_json(m.log.events));
  fmt::print("decomposition: {} planes, {} chunks\n", m.search.tree.planes().size(),
             m.search.tree.leaf_count());
  for (ChunkId id : m.log.skipped) fmt::print("chunk {}: no toolpath, skipped\n", id);
  if (m.log.samples.empty()) {
    write_json(out / "stats.json", {{"chunks", m.order.size()}, {"samples", 0}});
    fmt::print("no flight samples\n");
  } else {
    const TrackingReport r = tracking_stats(m.log);
    write_json(out / "stats.json", stats_json(r));
    print_report(r);
  }
  fmt::print("mission complete: {} of {} chunks in priority order\n", m.log.completed.size(),
             m.order.size());
  return m.log.completed == m.order ? 0 : 1;
}

int cmd_report(const RunConfig& c, const Options& o) {
  const fs::path trace_path = o.trace.empty() ? fs::path(c.out_dir) / "trace.csv" : fs::path(o.trace);
  std::ifstream in(trace_path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("trace not found: {}", trace_path.string()));
  fs::create_directories(c.out_dir);
  EmulationLog log;
  log.samples = read_trace(in);
  for (const TraceSample& s : log.samples) {
    if (s.extrude) {
      log.markers.push_back({s.extruder - Vec3{0, 0, c.mission.marker_offset},
                             c.mission.marker_radius, s.chunk, s.t});
    }
  }
  const TrackingReport r = tracking_stats(log);
  write_json(fs::path(c.out_dir) / "stats.json", stats_json(r));
  print_report(r);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aerial additive manufacturing pipeline: chunking, slicing, scheduling, flight emulation"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "Run config (JSON)");
    sub->add_option("--mesh", o.mesh, "Mesh file (.stl/.obj) or builtin:hollow_rectangle");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--seed", o.seed, "Noise seed");
    sub->add_option("--scale", o.scale, "Mesh scale factor");
    sub->add_flag("--dry-run", o.dry_run, "Validate the configuration and exit");
  };
  CLI::App* chunk = app.add_subcommand("chunk", "Decompose the mesh into printable chunks");
  CLI::App* slice = app.add_subcommand("slice", "Chunk, then write a toolpath per chunk");
  CLI::App* plan = app.add_subcommand("plan", "Chunk, slice and schedule without flying");
  CLI::App* simulate = app.add_subcommand("simulate", "Run the full emulated mission");
  CLI::App* report = app.add_subcommand("report", "Recompute tracking statistics from a trace");
  for (CLI::App* sub : {chunk, slice, plan, simulate, report}) add_common(sub);
  report->add_option("--trace", o.trace, "Trace CSV (default OUT/trace.csv)");

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig c = effective_config(o);
    if (o.dry_run) {
      fmt::print("config ok: mesh {}, {} agents, out {}\n", c.mesh, c.agents.size(), c.out_dir);
      return 0;
    }
    if (chunk->parsed()) return cmd_chunk(c);
    if (slice->parsed()) return cmd_slice(c);
    if (plan->parsed()) return cmd_plan(c);
    if (simulate->parsed()) return cmd_simulate(c);
    return cmd_report(c, o);
  } catch (const Error& e) {
    fmt::print(stderr, "error [{}]: {}\n", module_of(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}
