#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "aeroprint/chunk_search.hpp"
#include "aeroprint/flight_control.hpp"
#include "aeroprint/task_allocation.hpp"
#include "aeroprint/toolpath.hpp"

namespace aeroprint {

struct MissionConfig {
  double l_ex = 0.5;               // m, extruder length below the body
  double marker_radius = 0.003;    // m
  double marker_offset = 0.1;      // m, straight down from the tip
  double battery_rate = 0.003;     // battery fraction per metre flown
  double battery_threshold = 0.15;
  double transient_window = 1.0;   // s after each waypoint switch
  double noise_position = 0.0;     // m, std dev added per step
  double noise_velocity = 0.0;     // m/s, std dev added per step
  double max_chunk_time = 7200.0;  // s of simulated flight per chunk

  void validate() const;
  friend bool operator==(const MissionConfig&, const MissionConfig&) = default;
};

/// Start position of agent `index` (0-based) before its first chunk.
Vec3 home_position(std::size_t index);

struct DepositedMarker {
  Vec3 center;
  double radius = 0.0;
  ChunkId chunk_id = 0;
  double t = 0.0;
};

struct TraceSample {
  double t = 0.0;
  AgentId agent = 0;
  ChunkId chunk = 0;
  UavState state;
  StateVec x_ref{};
  Vec3 extruder;      // tip position from the body pose
  Vec3 extruder_ref;  // x_ref position minus l_ex along z
  bool extrude = false;
  ControlInput input;
  double cost = 0.0;
  std::size_t segment = 0;  // index of the waypoint being approached
  bool transient = false;   // inside the window after a waypoint switch
};

struct EmulationLog {
  std::vector<TraceSample> samples;
  std::vector<DepositedMarker> markers;
  std::vector<ScheduleEvent> events;
  std::vector<ChunkId> completed;
  // chunks too thin to produce a toolpath; completed without flying
  std::vector<ChunkId> skipped;
};

/// Flies one body-frame path with the controller, starting at `state` with
/// `u_prev` applied last, and appends to `log`. Time advances from
/// `step_index` (t = step_index * dt) and both are updated on return. One
/// marker is deposited per control step while the approached waypoint
/// extrudes. Throws TrackingTimeout after max_chunk_time.
void fly_path(const PrintPath& uav_path, AgentId agent, NmpcController& controller,
              const MissionConfig& mission, UavState& state, InputVec& u_prev,
              std::uint64_t& step_index, EmulationLog& log, std::mt19937_64* noise = nullptr);

struct MissionInputs {
  TriangleMesh mesh;
  SearchConfig search;
  std::vector<UavAgent> agents;
  SlicerParams slicer;
  NmpcConfig nmpc;
  ModelParams model;
  MissionConfig mission;
  std::optional<std::uint64_t> noise_seed;  // noise is drawn only when set
};

struct MissionResult {
  SearchResult search;
  std::vector<ChunkId> order;
  std::vector<UavAgent> agents;  // final battery and status
  EmulationLog log;
};

/// Search, schedule, slice and fly every chunk in priority order.
/// Propagates SearchExhausted, NoCapableAgent and NonFinite.
MissionResult run_mission(const MissionInputs& inputs);

struct AxisStats {
  Vec3 max;
  Vec3 mean;
  std::size_t samples = 0;
};

struct TrackingReport {
  AxisStats uav;              // all samples
  AxisStats extruder;
  AxisStats uav_steady;       // transient samples excluded
  AxisStats extruder_steady;
  std::map<ChunkId, AxisStats> uav_steady_by_chunk;
  double duration = 0.0;      // s
  std::size_t chunks = 0;
  std::size_t markers = 0;
};

/// Per-axis |measured - reference| statistics. Throws EmptyLog.
TrackingReport tracking_stats(const EmulationLog& log);

/// Flight trace as CSV with a header row; read_trace restores the samples.
void write_trace(std::ostream& out, const EmulationLog& log);
std::vector<TraceSample> read_trace(std::istream& in);

}  // namespace aeroprint
