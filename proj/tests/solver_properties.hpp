#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "aeroprint/flight_control.hpp"

namespace aeroprint::testing {

struct GradientCheck {
  int instances = 0;
  double worst_relative = 0.0;
};

inline StateVec random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  std::uniform_real_distribution<double> vel(-0.5, 0.5);
  std::uniform_real_distribution<double> ang(-0.2, 0.2);
  return {pos(rng), pos(rng), 1.0 + pos(rng), vel(rng), vel(rng), vel(rng), ang(rng), ang(rng)};
}

inline InputVec random_input(std::mt19937_64& rng, const NmpcConfig& c) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  InputVec u;
  for (int k = 0; k < 3; ++k) u[k] = c.u_min[k] + unit(rng) * (c.u_max[k] - c.u_min[k]);
  return u;
}

// Central differences with step h against the adjoint gradient, measured as
// ||g - g_fd|| / ||g_fd|| per instance.
inline GradientCheck check_gradients(int count, std::uint64_t seed, double h = 1e-6) {
  std::mt19937_64 rng(seed);
  const NmpcConfig c;
  const ModelParams m;
  GradientCheck out;
  std::uniform_real_distribution<double> offset(-1.0, 1.0);
  for (int inst = 0; inst < count; ++inst) {
    const StateVec x0 = random_state(rng);
    const Reference ref =
        hover_reference({x0[0] + offset(rng), x0[1] + offset(rng), x0[2] + offset(rng)}, m);
    const InputVec u_prev = random_input(rng, c);
    std::vector<InputVec> u(static_cast<std::size_t>(c.horizon));
    for (InputVec& uj : u) uj = random_input(rng, c);

    std::vector<InputVec> g(u.size());
    nmpc_cost_gradient(x0, u, ref, u_prev, c, m, g);
    double diff_sq = 0.0;
    double ref_sq = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      for (int k = 0; k < 3; ++k) {
        const double keep = u[j][k];
        u[j][k] = keep + h;
        const double up = nmpc_cost(x0, u, ref, u_prev, c, m);
        u[j][k] = keep - h;
        const double down = nmpc_cost(x0, u, ref, u_prev, c, m);
        u[j][k] = keep;
        const double fd = (up - down) / (2.0 * h);
        diff_sq += (g[j][k] - fd) * (g[j][k] - fd);
        ref_sq += fd * fd;
      }
    }
    ++out.instances;
    out.worst_relative = std::max(out.worst_relative, std::sqrt(diff_sq / ref_sq));
  }
  return out;
}

struct ConstraintCheck {
  int solves = 0;
  int violations = 0;
  std::string first_violation;
};

// Solves from random states, references and previous inputs (including
// previous inputs outside the box) and checks every returned sequence.
inline ConstraintCheck check_constraints(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const NmpcConfig c;
  const ModelParams m;
  ConstraintCheck out;
  std::uniform_real_distribution<double> offset(-2.0, 2.0);
  std::uniform_real_distribution<double> spill(-0.3, 0.3);
  const double tol = 1e-12;
  for (int inst = 0; inst < count; ++inst) {
    const StateVec x0 = random_state(rng);
    const Reference ref =
        hover_reference({x0[0] + offset(rng), x0[1] + offset(rng), x0[2] + offset(rng)}, m);
    InputVec u_prev = random_input(rng, c);
    if (inst % 4 == 0) {
      for (int k = 1; k < 3; ++k) u_prev[k] += spill(rng);
    }
    const NmpcSolution sol = nmpc_solve(x0, ref, u_prev, c, m);
    ++out.solves;
    InputVec before;
    for (int k = 0; k < 3; ++k) before[k] = std::clamp(u_prev[k], c.u_min[k], c.u_max[k]);
    const double rate[3] = {1e300, c.dphi_max, c.dtheta_max};
    bool ok = sol.sequence.size() == static_cast<std::size_t>(c.horizon);
    for (const InputVec& uj : sol.sequence) {
      for (int k = 0; k < 3; ++k) {
        ok = ok && uj[k] >= c.u_min[k] - tol && uj[k] <= c.u_max[k] + tol;
        ok = ok && std::abs(uj[k] - before[k]) <= rate[k] + tol;
      }
      before = uj;
    }
    ok = ok && sol.first == ControlInput::from(sol.sequence.front());
    if (!ok) {
      if (out.violations == 0) out.first_violation = "solve " + std::to_string(inst);
      ++out.violations;
    }
  }
  return out;
}

// Largest per-component deviation of the first input from (g, 0, 0) when
// the UAV already hovers at its reference.
inline double hover_deviation() {
  const NmpcConfig c;
  const ModelParams m;
  const Vec3 p{0.3, -0.2, 1.0};
  const StateVec x0 = UavState{p, {}, 0.0, 0.0}.vec();
  const NmpcSolution sol = nmpc_solve(x0, hover_reference(p, m), {m.g, 0, 0}, c, m);
  return std::max({std::abs(sol.first.thrust - m.g), std::abs(sol.first.phi_ref),
                   std::abs(sol.first.theta_ref)});
}

}  // namespace aeroprint::testing
