#include "aeroprint/config.hpp"

#include <fmt/format.h>

#include <fstream>
#include <set>
#include <sstream>

#include "aeroprint/error.hpp"
#include "aeroprint/mesh_io.hpp"

namespace aeroprint {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& path, const std::string& why) {
  throw Error(ErrorCode::kConfig, fmt::format("{}: {}", path, why));
}

// Reads the keys of one JSON object, remembering which were consumed so
// that leftovers can be reported as unknown.
class Block {
 public:
  Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) config_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void get(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) config_error(at(key), "expected a number");
      out = v->get<double>();
    }
  }
  void get(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) config_error(at(key), "expected an integer");
      out = v->get<int>();
    }
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) config_error(at(key), "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void get(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) config_error(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void get(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) config_error(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  template <std::size_t N>
  void get(const std::string& key, std::array<double, N>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != N) {
        config_error(at(key), fmt::format("expected an array of {} numbers", N));
      }
      for (std::size_t i = 0; i < N; ++i) {
        if (!(*v)[i].is_number()) config_error(fmt::format("{}[{}]", at(key), i), "expected a number");
        out[i] = (*v)[i].get<double>();
      }
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) config_error(at(key), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_search(Block b, SearchConfig& c) {
  b.get("phi_sample_max", c.phi_sample_max);
  b.get("n_polar", c.n_polar);
  b.get("n_azimuth", c.n_azimuth);
  b.get("delta", c.delta);
  b.get("w_inner", c.w_inner);
  b.get("w_outer", c.w_outer);
  b.get("g_disp", c.g_disp);
  b.get("g_part", c.g_part);
  b.get("g_faces", c.g_faces);
  b.get("max_iterations", c.max_iterations);
  b.get("phi_conn_max", c.phi_conn_max);
  b.get("extruder_h", c.extruder_h);
  b.get("extruder_l", c.extruder_l);
  b.get("literal_max_combinator", c.literal_max_combinator);
  b.get("dispersion_sqrt", c.dispersion_sqrt);
  b.finish();
}

json write_search(const SearchConfig& c) {
  return {{"phi_sample_max", c.phi_sample_max},
          {"n_polar", c.n_polar},
          {"n_azimuth", c.n_azimuth},
          {"delta", c.delta},
          {"w_inner", c.w_inner},
          {"w_outer", c.w_outer},
          {"g_disp", c.g_disp},
          {"g_part", c.g_part},
          {"g_faces", c.g_faces},
          {"max_iterations", c.max_iterations},
          {"phi_conn_max", c.phi_conn_max},
          {"extruder_h", c.extruder_h},
          {"extruder_l", c.extruder_l},
          {"literal_max_combinator", c.literal_max_combinator},
          {"dispersion_sqrt", c.dispersion_sqrt}};
}

void read_nmpc(Block b, NmpcConfig& c) {
  b.get("horizon", c.horizon);
  b.get("dt", c.dt);
  b.get("q_x", c.q_x);
  b.get("q_u", c.q_u);
  b.get("q_du", c.q_du);
  b.get("u_min", c.u_min);
  b.get("u_max", c.u_max);
  b.get("dphi_max", c.dphi_max);
  b.get("dtheta_max", c.dtheta_max);
  b.get("solver_iters", c.solver_iters);
  b.get("step_size", c.step_size);
  b.get("accept_radius", c.accept_radius);
  b.get("ref_step", c.ref_step);
  b.finish();
}

json write_nmpc(const NmpcConfig& c) {
  return {{"horizon", c.horizon},         {"dt", c.dt},
          {"q_x", c.q_x},                 {"q_u", c.q_u},
          {"q_du", c.q_du},               {"u_min", c.u_min},
          {"u_max", c.u_max},             {"dphi_max", c.dphi_max},
          {"dtheta_max", c.dtheta_max},   {"solver_iters", c.solver_iters},
          {"step_size", c.step_size},     {"accept_radius", c.accept_radius},
          {"ref_step", c.ref_step}};
}

void read_model(Block b, ModelParams& m) {
  b.get("a_x", m.a_x);
  b.get("a_y", m.a_y);
  b.get("a_z", m.a_z);
  b.get("tau_phi", m.tau_phi);
  b.get("tau_theta", m.tau_theta);
  b.get("k_phi", m.k_phi);
  b.get("k_theta", m.k_theta);
  b.get("g", m.g);
  b.finish();
}

json write_model(const ModelParams& m) {
  return {{"a_x", m.a_x},         {"a_y", m.a_y},         {"a_z", m.a_z},
          {"tau_phi", m.tau_phi}, {"tau_theta", m.tau_theta}, {"k_phi", m.k_phi},
          {"k_theta", m.k_theta}, {"g", m.g}};
}

void read_mission(Block b, MissionConfig& m) {
  b.get("l_ex", m.l_ex);
  b.get("marker_radius", m.marker_radius);
  b.get("marker_offset", m.marker_offset);
  b.get("battery_rate", m.battery_rate);
  b.get("battery_threshold", m.battery_threshold);
  b.get("transient_window", m.transient_window);
  b.get("noise_position", m.noise_position);
  b.get("noise_velocity", m.noise_velocity);
  b.get("max_chunk_time", m.max_chunk_time);
  b.finish();
}

json write_mission(const MissionConfig& m) {
  return {{"l_ex", m.l_ex},
          {"marker_radius", m.marker_radius},
          {"marker_offset", m.marker_offset},
          {"battery_rate", m.battery_rate},
          {"battery_threshold", m.battery_threshold},
          {"transient_window", m.transient_window},
          {"noise_position", m.noise_position},
          {"noise_velocity", m.noise_velocity},
          {"max_chunk_time", m.max_chunk_time}};
}

}  // namespace

void RunConfig::validate() const {
  if (mesh.empty()) config_error("mesh", "must not be empty");
  if (!(std::isfinite(scale) && scale > 0)) config_error("scale", "must be > 0");
  if (out_dir.empty()) config_error("out_dir", "must not be empty");
  if (agents.empty()) config_error("agents", "at least one agent is required");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const AgentSpec& a = agents[i];
    if (!(std::isfinite(a.capacity) && a.capacity > 0)) {
      config_error(fmt::format("agents[{}].capacity", i), "must be > 0");
    }
    if (!(std::isfinite(a.battery) && a.battery >= 0 && a.battery <= 1)) {
      config_error(fmt::format("agents[{}].battery", i), "must lie in [0, 1]");
    }
  }
  SearchConfig s = search;
  s.capacities.clear();
  for (const AgentSpec& a : agents) s.capacities.push_back(a.capacity);
  s.validate();
  slicer.validate();
  nmpc.validate();
  model.validate();
  mission.validate();
  if (mesh != kBuiltinHollowRectangle && !std::filesystem::exists(mesh)) {
    throw Error(ErrorCode::kIo, fmt::format("mesh not found: {}", mesh));
  }
}

RunConfig parse_run_config(const json& j) {
  RunConfig c;
  Block root(j, "");
  root.get("mesh", c.mesh);
  root.get("scale", c.scale);
  root.get("out_dir", c.out_dir);
  root.get("seed", c.seed);
  if (const json* agents = root.find("agents")) {
    if (!agents->is_array()) config_error("agents", "expected an array");
    c.agents.clear();
    for (std::size_t i = 0; i < agents->size(); ++i) {
      Block a((*agents)[i], fmt::format("agents[{}]", i));
      AgentSpec spec;
      a.get("capacity", spec.capacity);
      a.get("battery", spec.battery);
      a.finish();
      c.agents.push_back(spec);
    }
  }
  if (const json* v = root.find("search")) read_search(Block(*v, "search"), c.search);
  if (const json* v = root.find("slicer")) {
    Block b(*v, "slicer");
    b.get("layer_height", c.slicer.layer_height);
    b.get("line_spacing", c.slicer.line_spacing);
    b.finish();
  }
  if (const json* v = root.find("control")) {
    Block b(*v, "control");
    if (const json* n = b.find("nmpc")) read_nmpc(Block(*n, "control.nmpc"), c.nmpc);
    if (const json* m = b.find("model")) read_model(Block(*m, "control.model"), c.model);
    b.finish();
  }
  if (const json* v = root.find("mission")) read_mission(Block(*v, "mission"), c.mission);
  root.finish();

  c.search.capacities.clear();
  for (const AgentSpec& a : c.agents) c.search.capacities.push_back(a.capacity);
  return c;
}

RunConfig parse_run_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, fmt::format("<root>: invalid JSON ({})", e.what()));
  }
  return parse_run_config(j);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, fmt::format("config not found: {}", path.string()));
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(std::string_view(text.str()));
}

json to_json(const RunConfig& c) {
  json agents = json::array();
  for (const AgentSpec& a : c.agents) agents.push_back({{"capacity", a.capacity}, {"battery", a.battery}});
  return {{"mesh", c.mesh},
          {"scale", c.scale},
          {"out_dir", c.out_dir},
          {"seed", c.seed},
          {"agents", agents},
          {"search", write_search(c.search)},
          {"slicer", {{"layer_height", c.slicer.layer_height}, {"line_spacing", c.slicer.line_spacing}}},
          {"control", {{"nmpc", write_nmpc(c.nmpc)}, {"model", write_model(c.model)}}},
          {"mission", write_mission(c.mission)}};
}

TriangleMesh load_mesh(const RunConfig& c) {
  if (c.mesh == kBuiltinHollowRectangle) {
    TriangleMesh m = make_hollow_rectangle(2.0, 2.0, 0.5, 0.1);
    return c.scale == 1.0 ? m : scaled(m, c.scale);
  }
  if (!std::filesystem::exists(c.mesh)) {
    throw Error(ErrorCode::kIo, fmt::format("mesh not found: {}", c.mesh));
  }
  return read_mesh(c.mesh, c.scale);
}

std::vector<UavAgent> make_agents(const RunConfig& c) {
  std::vector<UavAgent> out;
  for (std::size_t i = 0; i < c.agents.size(); ++i) {
    out.push_back({static_cast<AgentId>(i), c.agents[i].capacity, c.agents[i].battery,
                   AgentStatus::kIdle});
  }
  return out;
}

MissionInputs mission_inputs(const RunConfig& c) {
  MissionInputs in;
  in.mesh = load_mesh(c);
  in.search = c.search;
  in.agents = make_agents(c);
  in.search.capacities.clear();
  for (const UavAgent& a : in.agents) in.search.capacities.push_back(a.capacity);
  in.slicer = c.slicer;
  in.nmpc = c.nmpc;
  in.model = c.model;
  in.mission = c.mission;
  in.noise_seed = c.seed;
  return in;
}

}  // namespace aeroprint
