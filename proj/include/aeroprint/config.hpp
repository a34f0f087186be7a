#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aeroprint/chunk_search.hpp"
#include "aeroprint/flight_control.hpp"
#include "aeroprint/mission_emulator.hpp"
#include "aeroprint/toolpath.hpp"
#include "json.hpp"

namespace aeroprint {

inline constexpr std::string_view kBuiltinHollowRectangle = "builtin:hollow_rectangle";

struct AgentSpec {
  double capacity = 0.08;  // m^3
  double battery = 1.0;
  friend bool operator==(const AgentSpec&, const AgentSpec&) = default;
};

/// Everything one run needs. The search capacities are not configured
/// separately: they are the agents' capacities.
struct RunConfig {
  std::string mesh{kBuiltinHollowRectangle};
  double scale = 1.0;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::vector<AgentSpec> agents{{}, {}};
  SearchConfig search;
  SlicerParams slicer;
  NmpcConfig nmpc;
  ModelParams model;
  MissionConfig mission;

  /// Throws Config naming the offending field, or Io for a missing mesh.
  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Missing keys keep their defaults; unknown keys and wrong types raise
/// Config with the key's path (e.g. "control.nmpc.horizon").
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Full effective configuration; parse_run_config(to_json(c)) == c.
nlohmann::json to_json(const RunConfig& config);

/// The configured mesh, scaled; the builtin hollow rectangle is 2 x 2 x 0.5 m
/// with 0.1 m walls.
TriangleMesh load_mesh(const RunConfig& config);

std::vector<UavAgent> make_agents(const RunConfig& config);
MissionInputs mission_inputs(const RunConfig& config);

}  // namespace aeroprint
