#include <cmath>
#include <random>

#include "aeroprint/error.hpp"
#include "aeroprint/flight_control.hpp"
#include "doctest.h"
#include "solver_properties.hpp"

using namespace aeroprint;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an aeroprint::Error");
  return ErrorCode::kIo;
}

// Closed loop against a fixed hover reference, plant = the model itself.
StateVec settle(const Vec3& start, const Vec3& target, double seconds) {
  NmpcController ctl({}, {});
  const ModelParams& m = ctl.params();
  StateVec x = UavState{start, {}, 0.0, 0.0}.vec();
  InputVec u{m.g, 0.0, 0.0};
  const Reference ref = hover_reference(target, m);
  const int steps = static_cast<int>(std::lround(seconds / ctl.config().dt));
  for (int k = 0; k < steps; ++k) {
    u = ctl.solve(x, ref, u).first.vec();
    x = step_euler(x, u, m, ctl.config().dt);
  }
  return x;
}

}  // namespace

TEST_CASE("dynamics at hover and under extra thrust") {
  const ModelParams m;
  const StateVec hover = UavState{{1, 2, 3}, {}, 0, 0}.vec();
  for (double d : dynamics_derivative(hover, {m.g, 0, 0}, m)) CHECK(d == 0.0);

  const StateVec d = dynamics_derivative(hover, {m.g + 1.0, 0, 0}, m);
  CHECK(d[3] == 0.0);
  CHECK(d[4] == 0.0);
  CHECK(d[5] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("attitude tilts the thrust") {
  const ModelParams m;
  const double eps = 1e-4;
  const StateVec pitched = UavState{{}, {}, 0.0, eps}.vec();
  const StateVec d = dynamics_derivative(pitched, {m.g, 0, eps}, m);
  CHECK(d[3] == doctest::Approx(m.g * eps).epsilon(1e-6));
  CHECK(d[7] == doctest::Approx(0.0));

  const StateVec rolled = UavState{{}, {}, eps, 0.0}.vec();
  CHECK(dynamics_derivative(rolled, {m.g, 0, 0}, m)[4] == doctest::Approx(-m.g * eps).epsilon(1e-6));
}

TEST_CASE("euler step of the damping") {
  const ModelParams m;
  const StateVec x = UavState{{}, {1, 0, 0}, 0, 0}.vec();
  const StateVec next = step_euler(x, {m.g, 0, 0}, m, 0.05);
  CHECK(next[3] == doctest::Approx(0.995));
  CHECK(next[0] == doctest::Approx(0.05));
}

TEST_CASE("euler error shrinks linearly with dt") {
  const ModelParams m;
  const StateVec x0 = UavState{{}, {0.3, -0.2, 0.1}, 0.05, -0.08}.vec();
  const InputVec u{m.g + 0.5, 0.1, 0.15};
  auto run = [&](int n) {
    StateVec x = x0;
    for (int i = 0; i < n; ++i) x = step_euler(x, u, m, 1.0 / n);
    return x;
  };
  const StateVec coarse = run(400);
  const StateVec fine = run(800);
  const StateVec finer = run(1600);
  for (int i = 0; i < 8; ++i) {
    const double e1 = coarse[i] - fine[i];
    const double e2 = fine[i] - finer[i];
    if (std::abs(e1) > 1e-9) CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.02));
  }
}

TEST_CASE("cost vanishes on the reference") {
  const NmpcConfig c;
  const ModelParams m;
  const Vec3 p{0.5, 0.5, 1};
  const std::vector<InputVec> u(c.horizon, InputVec{m.g, 0, 0});
  CHECK(nmpc_cost(UavState{p, {}, 0, 0}.vec(), u, hover_reference(p, m), {m.g, 0, 0}, c, m) ==
        0.0);
}

TEST_CASE("rate term of the first input uses the previous input") {
  NmpcConfig c;
  c.horizon = 1;
  c.q_x.fill(0.0);
  c.q_u.fill(0.0);
  const ModelParams m;
  const std::vector<InputVec> u{{m.g, 0.1, 0}};
  const double j = nmpc_cost({}, u, hover_reference({}, m), {m.g, 0, 0}, c, m);
  CHECK(j == doctest::Approx(c.q_du[1] * 0.01));
}

TEST_CASE("adjoint gradient matches central differences") {
  const auto check = aeroprint::testing::check_gradients(30, 11);
  CHECK(check.instances == 30);
  CHECK(check.worst_relative < 1e-4);
}

TEST_CASE("projection") {
  NmpcConfig c;
  std::vector<InputVec> u{{20, 0.5, -0.5}, {1, -0.5, 0.5}, {10, 0.0, 0.0}};
  project_inputs(u, {9.81, 0, 0}, c);
  CHECK(u[0] == InputVec{15.5, 0.04, -0.04});
  CHECK(u[1] == InputVec{3.0, 0.0, 0.0});
  CHECK(u[2] == InputVec{10.0, 0.0, 0.0});

  SUBCASE("previous input outside the box") {
    std::vector<InputVec> v{{5, 0.2, 0.2}};
    project_inputs(v, {5, 0.5, -0.5}, c);
    CHECK(v[0][1] == doctest::Approx(0.2));
    CHECK(v[0][2] == doctest::Approx(-0.16));
  }
}

TEST_CASE("hover is a fixed point of the solver") {
  CHECK(aeroprint::testing::hover_deviation() < 1e-3);

  SUBCASE("from a perturbed warm start") {
    const NmpcConfig c;
    const ModelParams m;
    const Vec3 p{0, 0, 1};
    std::vector<InputVec> warm(c.horizon, InputVec{m.g + 1.5, 0.03, -0.03});
    const NmpcSolution sol =
        nmpc_solve(UavState{p, {}, 0, 0}.vec(), hover_reference(p, m), {m.g, 0, 0}, c, m, warm);
    CHECK(sol.first.thrust == doctest::Approx(m.g).epsilon(1e-3));
    CHECK(std::abs(sol.first.phi_ref) < 1e-3);
    CHECK(std::abs(sol.first.theta_ref) < 1e-3);
  }
}

TEST_CASE("a target ahead in x pitches forward") {
  const NmpcConfig c;
  const ModelParams m;
  const NmpcSolution sol =
      nmpc_solve(UavState{{0, 0, 1}, {}, 0, 0}.vec(), hover_reference({0.5, 0, 1}, m),
                 {m.g, 0, 0}, c, m);
  CHECK(sol.first.theta_ref > 0.0);
  CHECK(sol.first.theta_ref <= c.dtheta_max + 1e-12);
  CHECK(std::abs(sol.first.phi_ref) < 1e-6);
  CHECK(sol.cost < nmpc_cost(UavState{{0, 0, 1}, {}, 0, 0}.vec(),
                             std::vector<InputVec>(c.horizon, InputVec{m.g, 0, 0}),
                             hover_reference({0.5, 0, 1}, m), {m.g, 0, 0}, c, m));
}

TEST_CASE("solver outputs stay feasible") {
  const auto check = aeroprint::testing::check_constraints(100, 5);
  CHECK(check.solves == 100);
  CHECK_MESSAGE(check.violations == 0, check.first_violation);
}

TEST_CASE("non-finite rollout") {
  const NmpcConfig c;
  const ModelParams m;
  StateVec x = UavState{{0, 0, 1}, {}, 0, 0}.vec();
  x[3] = std::nan("");
  CHECK(code_of([&] { nmpc_solve(x, hover_reference({}, m), {m.g, 0, 0}, c, m); }) ==
        ErrorCode::kNonFinite);
}

TEST_CASE("closed loop reaches a 1 m setpoint") {
  const Vec3 target{1.0, 0.0, 1.0};
  const StateVec x = settle({0, 0, 1}, target, 20.0);
  CHECK(norm(Vec3{x[0], x[1], x[2]} - target) < 0.01);
  CHECK(std::abs(x[3]) + std::abs(x[4]) + std::abs(x[5]) < 0.05);
}

TEST_CASE("controller is deterministic") {
  const StateVec a = settle({0, 0, 1}, {0.3, -0.4, 1.2}, 2.0);
  const StateVec b = settle({0, 0, 1}, {0.3, -0.4, 1.2}, 2.0);
  CHECK(a == b);
}

TEST_CASE("config validation") {
  NmpcConfig c;
  c.horizon = 0;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::kConfig);
  c = {};
  c.u_min[0] = 20;
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::kConfig);
  ModelParams m;
  m.tau_phi = 0;
  CHECK(code_of([&] { m.validate(); }) == ErrorCode::kConfig);
  CHECK(code_of([&] { NmpcController(NmpcConfig{}, m); }) == ErrorCode::kConfig);
}

TEST_CASE("densify") {
  PrintPath path;
  path.waypoints = {{{0, 0, 0}, false, {}}, {{0.1, 0, 0}, true, {}}, {{0.1, 0, 0}, true, {}},
                    {{0.1, 0.025, 0}, false, {}}};
  std::vector<std::size_t> source;
  const PrintPath d = densify(path, 0.01, &source);
  REQUIRE(d.waypoints.size() == 1 + 10 + 1 + 3);
  REQUIRE(source.size() == d.waypoints.size());
  CHECK(source[0] == 0);
  CHECK(source[10] == 1);
  CHECK(source[11] == 2);
  CHECK(source[14] == 3);
  CHECK(d.waypoints[10].position == Vec3{0.1, 0, 0});
  CHECK(d.waypoints[5].position.x == doctest::Approx(0.05));
  CHECK(d.waypoints[5].extrude);
  CHECK_FALSE(d.waypoints[13].extrude);
  for (std::size_t i = 1; i < d.waypoints.size(); ++i) {
    CHECK(norm(d.waypoints[i].position - d.waypoints[i - 1].position) <= 0.01 + 1e-12);
  }
  CHECK(code_of([&] { densify(path, 0.0); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("reference walks the path") {
  const NmpcConfig c;
  const ModelParams m;
  PrintPath path;
  path.waypoints = {{{0, 0, 1}, false, {}}, {{0.2, 0, 1}, true, {}}};
  std::size_t cursor = 0;

  Reference r = reference_for(path, UavState{{1, 1, 1}, {}, 0, 0}.vec(), cursor, c, m);
  CHECK(cursor == 0);
  CHECK(r.x_ref[0] == 0.0);
  CHECK(r.u_ref == InputVec{m.g, 0, 0});

  r = reference_for(path, UavState{{0.01, 0, 1}, {}, 0, 0}.vec(), cursor, c, m);
  CHECK(cursor == 1);
  CHECK(r.x_ref[0] == doctest::Approx(0.2));

  CHECK(code_of([&] { reference_for(path, UavState{{0.2, 0, 1}, {}, 0, 0}.vec(), cursor, c, m); }) ==
        ErrorCode::kPathComplete);
  CHECK(code_of([&] {
          std::size_t k = 0;
          reference_for(PrintPath{}, StateVec{}, k, c, m);
        }) == ErrorCode::kEmptyInput);
}
