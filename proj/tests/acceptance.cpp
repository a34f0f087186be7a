// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure.
#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "aeroprint/chunk_search.hpp"
#include "aeroprint/config.hpp"
#include "aeroprint/error.hpp"
#include "aeroprint/geometry.hpp"
#include "aeroprint/json_io.hpp"
#include "aeroprint/mission_emulator.hpp"
#include "scheduling_properties.hpp"
#include "search_oracle.hpp"
#include "solver_properties.hpp"
#include "test_support.hpp"

using namespace aeroprint;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

SearchConfig paper_gains() {
  SearchConfig c;
  c.g_disp = 200;
  c.g_part = 10;
  c.g_faces = 20;
  return c;
}

Outcome ac1_volume_conservation() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  int cuts = 0;
  int redrawn = 0;
  bool watertight = true;
  for (const TriangleMesh& mesh : {make_box({0, 0, 0}, {1, 1, 1}), make_hollow_rectangle()}) {
    const double parent = mesh_volume(mesh);
    const Bounds box = bounds(mesh);
    for (int k = 0; k < 50;) {
      const Plane plane = Plane::through(aeroprint::testing::random_point_in(box, rng),
                                         aeroprint::testing::random_unit(rng));
      SplitResult halves;
      try {
        halves = split_mesh(mesh, plane);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateCut) throw;
        ++redrawn;  // plane misses the material
        continue;
      }
      watertight = watertight && is_watertight(halves.negative) && is_watertight(halves.positive);
      const double sum = mesh_volume(halves.negative) + mesh_volume(halves.positive);
      worst = std::max(worst, std::abs(sum - parent) / parent);
      ++k;
      ++cuts;
    }
  }
  const double total = mesh_volume(make_hollow_rectangle());
  const double elapsed = seconds_since(t0);
  const bool pass = worst <= 1e-6 && std::abs(total - 0.38) <= 1e-6 && watertight && elapsed < 10.0;
  return {pass, fmt::format("{} cuts ({} redrawn), worst relative volume error {:.3g}, "
                            "hollow rectangle {:.12f} m^3, watertight {}, {:.2f} s",
                            cuts, redrawn, worst, total, watertight, elapsed)};
}

Outcome ac2_search_oracle() {
  const auto t0 = Clock::now();
  std::vector<std::string> parts;
  bool pass = true;
  auto compare = [&](const std::string& name, const TriangleMesh& mesh, SearchConfig c) {
    const auto candidates = candidate_planes(mesh, c);
    c.w_inner = std::max<int>(c.w_inner, static_cast<int>(candidates.size()));
    c.w_outer = std::max<int>(c.w_outer, static_cast<int>(candidates.size()));
    c.max_iterations = 2;
    const SearchResult r = beam_search(mesh, c);
    const double oracle = aeroprint::testing::exhaustive_min(mesh, candidates, 2, c);
    pass = pass && r.heuristic == oracle;
    parts.push_back(fmt::format("{}: {} candidates, beam h {} vs exhaustive {}", name,
                                candidates.size(), r.heuristic, oracle));
  };
  SearchConfig c = paper_gains();
  c.phi_sample_max = 0.0;  // vertical normal only
  c.delta = 0.5;
  c.capacities = {0.6};
  compare("2 x 1 x 1 lying", make_box({0, 0, 0}, {2, 1, 1}), c);
  compare("1 x 1 x 2 standing", make_box({0, 0, 0}, {1, 1, 2}), c);
  const double elapsed = seconds_since(t0);
  pass = pass && elapsed < 5.0;
  return {pass, fmt::format("{}; {}; {:.2f} s", parts[0], parts[1], elapsed)};
}

Outcome ac3_seed_heuristic() {
  const SearchConfig g = paper_gains();
  const BspTree cut = apply_cut(BspTree(make_box({0, 0, 0}, {1, 1, 1})), Plane{{0, 0, 0.5}, {0, 0, 1}});
  const auto leaves = cut.leaves();
  const LeafScore bottom = score_leaf(*leaves[0], cut.planes());
  const LeafScore top = score_leaf(*leaves[1], cut.planes());
  const double g_bottom = chunk_reward(bottom.seed, bottom.positive_faces, g);
  const double g_top = chunk_reward(top.seed, top.positive_faces, g);
  const LeafScore two_seeds[] = {{0.5, 1, 1}, {0.5, 1, 1}};
  const double h_two = tree_heuristic(two_seeds, g);
  const bool pass = bottom.seed == 1 && bottom.positive_faces == 1 && top.seed == 0 &&
                    g_bottom == 30.0 && g_top == 0.0 && h_two == -60.0;
  return {pass, fmt::format("bottom s={} p_faces={} g={}, top s={} g={}, h(two equal seeds)={}, "
                            "h(cut cube)={}",
                            bottom.seed, bottom.positive_faces, g_bottom, top.seed, g_top, h_two,
                            tree_heuristic(cut, g))};
}

Outcome ac4_paper_scenario() {
  const auto t0 = Clock::now();
  const RunConfig config;  // defaults are the experiment parameters
  const MissionInputs in = mission_inputs(config);
  const MissionResult m = run_mission(in);
  const TrackingReport r = tracking_stats(m.log);

  double leaf_sum = 0.0;
  double largest = 0.0;
  for (const auto& leaf : m.search.tree.leaves()) {
    leaf_sum += leaf->volume;
    largest = std::max(largest, leaf->volume);
  }
  const double max_capacity = *std::max_element(in.search.capacities.begin(), in.search.capacities.end());
  const double root = mesh_volume(in.mesh);
  const bool conserved = std::abs(leaf_sum - root) <= 1e-6 * root;
  const bool terminated = m.search.terminated && largest < max_capacity;
  const bool in_order = m.log.completed == m.order;
  const Vec3 e = r.uav_steady.max;
  const bool bounded = e.x <= 0.06 && e.y <= 0.06 && e.z <= 0.06;
  const double elapsed = seconds_since(t0);
  const bool pass = conserved && terminated && in_order && bounded && elapsed < 300.0;
  return {pass,
          fmt::format("{} planes, {} chunks (largest {:.4f} < {:.2f} m^3), volume {:.9f} of {:.9f}, "
                      "completion in priority order {}, steady UAV max error "
                      "({:.4f}, {:.4f}, {:.4f}) m, extruder ({:.4f}, {:.4f}, {:.4f}) m, "
                      "{:.0f} s simulated, {:.1f} s wall",
                      m.search.tree.planes().size(), m.search.tree.leaf_count(), largest,
                      max_capacity, leaf_sum, root, in_order, e.x, e.y, e.z,
                      r.extruder_steady.max.x, r.extruder_steady.max.y, r.extruder_steady.max.z,
                      r.duration, elapsed)};
}

Outcome ac5_solver_properties() {
  const auto t0 = Clock::now();
  const double hover = aeroprint::testing::hover_deviation();
  const auto grad = aeroprint::testing::check_gradients(100, 77);
  const auto cons = aeroprint::testing::check_constraints(1000, 78);
  const double elapsed = seconds_since(t0);
  const bool pass = hover < 1e-3 && grad.instances >= 100 && grad.worst_relative < 1e-4 &&
                    cons.solves == 1000 && cons.violations == 0 && elapsed < 60.0;
  return {pass, fmt::format("hover deviation {:.3g}, gradient worst relative error {:.3g} over {} "
                            "instances, {} constraint violations in {} solves, {:.1f} s",
                            hover, grad.worst_relative, grad.instances, cons.violations,
                            cons.solves, elapsed)};
}

Outcome ac6_scheduling() {
  const auto check = aeroprint::testing::check_random_schedules(1000, 4242);
  const bool pass = check.scenarios >= 1000 && check.violations.empty();
  std::string detail = fmt::format("{} scenarios, {} completed, {} stopped on NoCapableAgent, {} "
                                   "violations",
                                   check.scenarios, check.completed_missions, check.deadlocks,
                                   check.violations.size());
  if (!check.violations.empty()) detail += "; first: " + check.violations.front();
  return {pass, detail};
}

struct RunFiles {
  std::string tree;
  std::string order;
  std::string trace;
};

// The three artifacts exactly as the CLI writes them.
RunFiles full_run(const RunConfig& config) {
  const MissionResult m = run_mission(mission_inputs(config));
  std::ostringstream trace;
  write_trace(trace, m.log);
  return {tree_json(m.search.tree).dump(2) + "\n", order_json(m.order).dump(2) + "\n", trace.str()};
}

Outcome ac7_determinism() {
  const auto t0 = Clock::now();
  RunConfig config = load_run_config(AEROPRINT_TEST_DATA "/small_mission.json");
  const RunFiles a = full_run(config);
  const RunFiles b = full_run(config);
  config.seed += 1;
  const RunFiles other = full_run(config);
  const bool same = a.tree == b.tree && a.order == b.order && a.trace == b.trace;
  const bool seed_matters = a.trace != other.trace;
  return {same && seed_matters,
          fmt::format("tree.json {}, order.json {}, trace.csv {} ({} bytes); another seed gives a "
                      "different trace: {}; {:.1f} s",
                      a.tree == b.tree ? "identical" : "differs",
                      a.order == b.order ? "identical" : "differs",
                      a.trace == b.trace ? "identical" : "differs", a.trace.size(), seed_matters,
                      seconds_since(t0))};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"AC-1", ac1_volume_conservation}, {"AC-2", ac2_search_oracle},
      {"AC-3", ac3_seed_heuristic},      {"AC-4", ac4_paper_scenario},
      {"AC-5", ac5_solver_properties},   {"AC-6", ac6_scheduling},
      {"AC-7", ac7_determinism}};
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("raised {}", e.what())};
    }
    failed += o.pass ? 0 : 1;
    fmt::print("{} {}: {}\n", name, o.pass ? "PASS" : "FAIL", o.detail);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
