#include "aeroprint/mission_emulator.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "aeroprint/error.hpp"

namespace aeroprint {
namespace {

constexpr std::string_view kTraceHeader =
    "t,agent,chunk,px,py,pz,vx,vy,vz,phi,theta,"
    "ref_px,ref_py,ref_pz,ref_vx,ref_vy,ref_vz,ref_phi,ref_theta,"
    "ex,ey,ez,ex_ref,ey_ref,ez_ref,extrude,thrust,phi_cmd,theta_cmd,cost,segment,transient";
constexpr std::size_t kTraceColumns = 32;

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) {
    throw Error(ErrorCode::kConfig, fmt::format("{}: {}", field, why));
  }
}

// Tip of a rigid extruder hanging l_ex along the body's -z axis.
Vec3 extruder_tip(const UavState& s, double l_ex) {
  const Vec3 axis{std::sin(s.theta) * std::cos(s.phi), -std::sin(s.phi),
                  std::cos(s.theta) * std::cos(s.phi)};
  return s.p - axis * l_ex;
}

Vec3 abs3(const Vec3& v) { return {std::abs(v.x), std::abs(v.y), std::abs(v.z)}; }

Vec3 max3(const Vec3& a, const Vec3& b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

struct Accumulator {
  Vec3 max;
  Vec3 sum;
  std::size_t n = 0;

  void add(const Vec3& e) {
    max = max3(max, e);
    sum = sum + e;
    ++n;
  }
  AxisStats stats() const {
    AxisStats s;
    s.max = max;
    s.mean = n == 0 ? Vec3{} : sum / static_cast<double>(n);
    s.samples = n;
    return s;
  }
};

double parse_double(std::string_view field, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::kParseError,
                fmt::format("trace line {}: bad number '{}'", line, field));
  }
  return v;
}

std::uint64_t parse_uint(std::string_view field, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::kParseError,
                fmt::format("trace line {}: bad integer '{}'", line, field));
  }
  return v;
}

}  // namespace

void MissionConfig::validate() const {
  require(std::isfinite(l_ex) && l_ex > 0, "mission.l_ex", "must be > 0");
  require(std::isfinite(marker_radius) && marker_radius > 0, "mission.marker_radius",
          "must be > 0");
  require(std::isfinite(marker_offset) && marker_offset >= 0, "mission.marker_offset",
          "must be >= 0");
  require(std::isfinite(battery_rate) && battery_rate >= 0, "mission.battery_rate",
          "must be >= 0");
  require(std::isfinite(battery_threshold) && battery_threshold >= 0 && battery_threshold <= 1,
          "mission.battery_threshold", "must lie in [0, 1]");
  require(std::isfinite(transient_window) && transient_window >= 0, "mission.transient_window",
          "must be >= 0");
  require(std::isfinite(noise_position) && noise_position >= 0, "mission.noise_position",
          "must be >= 0");
  require(std::isfinite(noise_velocity) && noise_velocity >= 0, "mission.noise_velocity",
          "must be >= 0");
  require(std::isfinite(max_chunk_time) && max_chunk_time > 0, "mission.max_chunk_time",
          "must be > 0");
}

Vec3 home_position(std::size_t index) { return {-2.0 - 0.5 * static_cast<double>(index), -2.0, 1.0}; }

void fly_path(const PrintPath& uav_path, AgentId agent, NmpcController& controller,
              const MissionConfig& mission, UavState& state, InputVec& u_prev,
              std::uint64_t& step_index, EmulationLog& log, std::mt19937_64* noise) {
  if (uav_path.frame != PathFrame::kUavBody) {
    throw Error(ErrorCode::kInvalidArgument, "fly_path expects a body-frame path");
  }
  const NmpcConfig& cfg = controller.config();
  const ModelParams& model = controller.params();

  // waypoint 0 is where the UAV is now
  PrintPath full;
  full.frame = uav_path.frame;
  full.chunk_id = uav_path.chunk_id;
  full.waypoints.push_back({state.p, false, std::nullopt});
  full.waypoints.insert(full.waypoints.end(), uav_path.waypoints.begin(), uav_path.waypoints.end());
  std::vector<std::size_t> source;
  const PrintPath dense = densify(full, cfg.ref_step, &source);

  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto max_steps = static_cast<std::uint64_t>(std::ceil(mission.max_chunk_time / cfg.dt));
  std::size_t cursor = 0;
  std::size_t segment = 0;
  double switched_at = static_cast<double>(step_index) * cfg.dt;
  for (std::uint64_t steps = 0;; ++steps) {
    const double t = static_cast<double>(step_index) * cfg.dt;
    const StateVec x = state.vec();
    Reference ref;
    try {
      ref = reference_for(dense, x, cursor, cfg, model);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kPathComplete) break;
      throw;
    }
    if (steps >= max_steps) {
      throw Error(ErrorCode::kTrackingTimeout,
                  fmt::format("chunk {} not finished after {} s", uav_path.chunk_id,
                              mission.max_chunk_time));
    }
    if (source[cursor] != segment) {
      segment = source[cursor];
      switched_at = t;
    }

    const NmpcSolution sol = controller.solve(x, ref, u_prev);
    TraceSample s;
    s.t = t;
    s.agent = agent;
    s.chunk = uav_path.chunk_id;
    s.state = state;
    s.x_ref = ref.x_ref;
    s.extruder = extruder_tip(state, mission.l_ex);
    s.extruder_ref = Vec3{ref.x_ref[0], ref.x_ref[1], ref.x_ref[2] - mission.l_ex};
    s.extrude = dense.waypoints[cursor].extrude;
    s.input = sol.first;
    s.cost = sol.cost;
    s.segment = segment;
    s.transient = t - switched_at < mission.transient_window;
    if (s.extrude) {
      log.markers.push_back({s.extruder - Vec3{0, 0, mission.marker_offset}, mission.marker_radius,
                             uav_path.chunk_id, t});
    }
    log.samples.push_back(s);

    u_prev = sol.first.vec();
    StateVec next = step_euler(x, u_prev, model, cfg.dt);
    if (noise != nullptr) {
      for (int i = 0; i < 3; ++i) {
        if (mission.noise_position > 0) next[i] += mission.noise_position * gauss(*noise);
        if (mission.noise_velocity > 0) next[3 + i] += mission.noise_velocity * gauss(*noise);
      }
    }
    state = UavState::from(next);
    ++step_index;
  }
}

MissionResult run_mission(const MissionInputs& in) {
  in.search.validate();
  in.slicer.validate();
  in.nmpc.validate();
  in.model.validate();
  in.mission.validate();
  if (in.agents.empty()) {
    throw Error(ErrorCode::kConfig, "agents: at least one agent is required");
  }

  MissionResult out{require_terminated(beam_search(in.mesh, in.search)), {}, {}, {}};
  const BspTree& tree = out.search.tree;
  out.order = in_order_priority(tree);

  std::map<ChunkId, std::shared_ptr<const ChunkRecord>> chunks;
  std::map<ChunkId, double> volumes;
  for (const auto& leaf : tree.leaves()) {
    chunks[leaf->id] = leaf;
    volumes[leaf->id] = leaf->volume;
  }

  out.agents = in.agents;
  std::map<AgentId, UavState> states;
  std::map<AgentId, InputVec> inputs;
  for (std::size_t i = 0; i < out.agents.size(); ++i) {
    states[out.agents[i].id] = UavState{home_position(i), {}, 0.0, 0.0};
    inputs[out.agents[i].id] = {in.model.g, 0.0, 0.0};
  }

  std::optional<std::mt19937_64> rng;
  if (in.noise_seed) rng.emplace(*in.noise_seed);
  NmpcController controller(in.nmpc, in.model);
  PrintSchedule schedule = build_schedule(out.order);
  std::uint64_t step = 0;
  for (;;) {
    const double t = static_cast<double>(step) * in.nmpc.dt;
    const std::optional<Assignment> a = assign_next(schedule, out.agents, volumes, t);
    if (!a) break;

    PrintPath tip_path;
    try {
      tip_path = slice_chunk(chunks.at(a->chunk)->mesh, in.slicer);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptySlice) throw;
      out.log.skipped.push_back(a->chunk);
      complete(schedule, out.agents, a->agent, a->chunk, 0.0, in.mission.battery_threshold, t);
      continue;
    }
    tip_path.chunk_id = a->chunk;
    const PrintPath body_path = extruder_to_uav(tip_path, in.mission.l_ex);

    UavState& state = states[a->agent];
    const double flown = norm(body_path.waypoints.front().position - state.p) + path_length(body_path);
    controller.reset();
    fly_path(body_path, a->agent, controller, in.mission, state, inputs[a->agent], step, out.log,
             rng ? &*rng : nullptr);
    complete(schedule, out.agents, a->agent, a->chunk, flown * in.mission.battery_rate,
             in.mission.battery_threshold, static_cast<double>(step) * in.nmpc.dt);
  }
  out.log.events = schedule.log;
  out.log.completed = schedule.completed;
  return out;
}

TrackingReport tracking_stats(const EmulationLog& log) {
  if (log.samples.empty()) {
    throw Error(ErrorCode::kEmptyLog, "no trace samples");
  }
  Accumulator uav, ext, uav_steady, ext_steady;
  std::map<ChunkId, Accumulator> by_chunk;
  std::set<ChunkId> chunks;
  for (const TraceSample& s : log.samples) {
    const Vec3 e_uav = abs3(s.state.p - Vec3{s.x_ref[0], s.x_ref[1], s.x_ref[2]});
    const Vec3 e_ext = abs3(s.extruder - s.extruder_ref);
    uav.add(e_uav);
    ext.add(e_ext);
    chunks.insert(s.chunk);
    if (!s.transient) {
      uav_steady.add(e_uav);
      ext_steady.add(e_ext);
      by_chunk[s.chunk].add(e_uav);
    }
  }
  TrackingReport r;
  r.uav = uav.stats();
  r.extruder = ext.stats();
  r.uav_steady = uav_steady.stats();
  r.extruder_steady = ext_steady.stats();
  for (const auto& [id, acc] : by_chunk) r.uav_steady_by_chunk[id] = acc.stats();
  r.duration = log.samples.back().t - log.samples.front().t;
  r.chunks = chunks.size();
  r.markers = log.markers.size();
  return r;
}

void write_trace(std::ostream& out, const EmulationLog& log) {
  out << kTraceHeader << '\n';
  for (const TraceSample& s : log.samples) {
    const StateVec x = s.state.vec();
    std::string line = fmt::format("{},{},{}", s.t, s.agent, s.chunk);
    for (double v : x) line += fmt::format(",{}", v);
    for (double v : s.x_ref) line += fmt::format(",{}", v);
    line += fmt::format(",{},{},{},{},{},{},{:d},{},{},{},{},{},{:d}\n", s.extruder.x, s.extruder.y,
                        s.extruder.z, s.extruder_ref.x, s.extruder_ref.y, s.extruder_ref.z,
                        static_cast<int>(s.extrude), s.input.thrust, s.input.phi_ref,
                        s.input.theta_ref, s.cost, s.segment, static_cast<int>(s.transient));
    out << line;
  }
}

std::vector<TraceSample> read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw Error(ErrorCode::kParseError, "trace: missing or unexpected header");
  }
  std::vector<TraceSample> samples;
  std::size_t line_no = 1;
  std::vector<std::string_view> f;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    f.clear();
    std::string_view rest = line;
    for (;;) {
      const std::size_t comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != kTraceColumns) {
      throw Error(ErrorCode::kParseError,
                  fmt::format("trace line {}: expected {} fields, got {}", line_no, kTraceColumns,
                              f.size()));
    }
    TraceSample s;
    s.t = parse_double(f[0], line_no);
    s.agent = static_cast<AgentId>(parse_uint(f[1], line_no));
    s.chunk = static_cast<ChunkId>(parse_uint(f[2], line_no));
    StateVec x;
    for (int i = 0; i < 8; ++i) x[i] = parse_double(f[3 + i], line_no);
    s.state = UavState::from(x);
    for (int i = 0; i < 8; ++i) s.x_ref[i] = parse_double(f[11 + i], line_no);
    s.extruder = {parse_double(f[19], line_no), parse_double(f[20], line_no),
                  parse_double(f[21], line_no)};
    s.extruder_ref = {parse_double(f[22], line_no), parse_double(f[23], line_no),
                      parse_double(f[24], line_no)};
    s.extrude = parse_uint(f[25], line_no) != 0;
    s.input = {parse_double(f[26], line_no), parse_double(f[27], line_no),
               parse_double(f[28], line_no)};
    s.cost = parse_double(f[29], line_no);
    s.segment = parse_uint(f[30], line_no);
    s.transient = parse_uint(f[31], line_no) != 0;
    samples.push_back(s);
  }
  return samples;
}

}  // namespace aeroprint
