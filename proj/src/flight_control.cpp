#include "aeroprint/flight_control.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "aeroprint/error.hpp"

namespace aeroprint {
namespace {

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) {
    throw Error(ErrorCode::kConfig, fmt::format("{}: {}", field, why));
  }
}

// Transposed Jacobians of the continuous dynamics applied to an adjoint.
StateVec fx_transpose(const StateVec& x, const InputVec& u, const ModelParams& m,
                      const StateVec& lam) {
  const double t = u[0];
  const double sp = std::sin(x[6]);
  const double cp = std::cos(x[6]);
  const double st = std::sin(x[7]);
  const double ct = std::cos(x[7]);
  StateVec r{};
  r[3] = lam[0] - m.a_x * lam[3];
  r[4] = lam[1] - m.a_y * lam[4];
  r[5] = lam[2] - m.a_z * lam[5];
  r[6] = -t * st * sp * lam[3] - t * cp * lam[4] - t * ct * sp * lam[5] - lam[6] / m.tau_phi;
  r[7] = t * ct * cp * lam[3] - t * st * cp * lam[5] - lam[7] / m.tau_theta;
  return r;
}

InputVec fu_transpose(const StateVec& x, const ModelParams& m, const StateVec& lam) {
  const double sp = std::sin(x[6]);
  const double cp = std::cos(x[6]);
  const double st = std::sin(x[7]);
  const double ct = std::cos(x[7]);
  return {st * cp * lam[3] - sp * lam[4] + ct * cp * lam[5], m.k_phi / m.tau_phi * lam[6],
          m.k_theta / m.tau_theta * lam[7]};
}

}  // namespace

void ModelParams::validate() const {
  require(a_x >= 0 && a_y >= 0 && a_z >= 0, "control.model.damping", "must be >= 0");
  require(std::isfinite(a_x + a_y + a_z), "control.model.damping", "must be finite");
  require(std::isfinite(tau_phi) && tau_phi > 0, "control.model.tau_phi", "must be > 0");
  require(std::isfinite(tau_theta) && tau_theta > 0, "control.model.tau_theta", "must be > 0");
  require(std::isfinite(k_phi) && std::isfinite(k_theta), "control.model.gains", "must be finite");
  require(std::isfinite(g) && g > 0, "control.model.g", "must be > 0");
}

void NmpcConfig::validate() const {
  require(horizon >= 1, "control.nmpc.horizon", "must be >= 1");
  require(std::isfinite(dt) && dt > 0, "control.nmpc.dt", "must be > 0");
  for (double q : q_x) require(std::isfinite(q) && q >= 0, "control.nmpc.q_x", "weights must be >= 0");
  for (double q : q_u) require(std::isfinite(q) && q >= 0, "control.nmpc.q_u", "weights must be >= 0");
  for (double q : q_du) require(std::isfinite(q) && q >= 0, "control.nmpc.q_du", "weights must be >= 0");
  for (int k = 0; k < 3; ++k) {
    require(std::isfinite(u_min[k]) && std::isfinite(u_max[k]) && u_min[k] <= u_max[k],
            "control.nmpc.u_min", "must be finite and <= u_max");
  }
  require(std::isfinite(dphi_max) && dphi_max >= 0, "control.nmpc.dphi_max", "must be >= 0");
  require(std::isfinite(dtheta_max) && dtheta_max >= 0, "control.nmpc.dtheta_max", "must be >= 0");
  require(solver_iters >= 0, "control.nmpc.solver_iters", "must be >= 0");
  require(std::isfinite(step_size) && step_size > 0, "control.nmpc.step_size", "must be > 0");
  require(std::isfinite(accept_radius) && accept_radius > 0, "control.nmpc.accept_radius",
          "must be > 0");
  require(std::isfinite(ref_step) && ref_step > 0, "control.nmpc.ref_step", "must be > 0");
}

StateVec dynamics_derivative(const StateVec& x, const InputVec& u, const ModelParams& m) {
  const double t = u[0];
  const double sp = std::sin(x[6]);
  const double cp = std::cos(x[6]);
  const double st = std::sin(x[7]);
  const double ct = std::cos(x[7]);
  return {x[3],
          x[4],
          x[5],
          t * st * cp - m.a_x * x[3],
          -t * sp - m.a_y * x[4],
          t * ct * cp - m.g - m.a_z * x[5],
          (m.k_phi * u[1] - x[6]) / m.tau_phi,
          (m.k_theta * u[2] - x[7]) / m.tau_theta};
}

StateVec step_euler(const StateVec& x, const InputVec& u, const ModelParams& params, double dt) {
  const StateVec d = dynamics_derivative(x, u, params);
  StateVec out;
  for (int i = 0; i < 8; ++i) out[i] = x[i] + dt * d[i];
  return out;
}

double nmpc_cost(const StateVec& x0, std::span<const InputVec> u, const Reference& ref,
                 const InputVec& u_prev, const NmpcConfig& c, const ModelParams& params) {
  double j_total = 0.0;
  StateVec x = x0;
  InputVec before = u_prev;
  for (const InputVec& uj : u) {
    x = step_euler(x, uj, params, c.dt);
    for (int i = 0; i < 8; ++i) {
      const double e = x[i] - ref.x_ref[i];
      j_total += c.q_x[i] * e * e;
    }
    for (int k = 0; k < 3; ++k) {
      const double e = uj[k] - ref.u_ref[k];
      const double d = uj[k] - before[k];
      j_total += c.q_u[k] * e * e + c.q_du[k] * d * d;
    }
    before = uj;
  }
  return j_total;
}

double nmpc_cost_gradient(const StateVec& x0, std::span<const InputVec> u, const Reference& ref,
                          const InputVec& u_prev, const NmpcConfig& c, const ModelParams& params,
                          std::span<InputVec> grad) {
  const std::size_t n = u.size();
  std::vector<StateVec> xs(n + 1);
  xs[0] = x0;
  for (std::size_t j = 0; j < n; ++j) xs[j + 1] = step_euler(xs[j], u[j], params, c.dt);

  double j_total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const InputVec& before = j == 0 ? u_prev : u[j - 1];
    for (int i = 0; i < 8; ++i) {
      const double e = xs[j + 1][i] - ref.x_ref[i];
      j_total += c.q_x[i] * e * e;
    }
    for (int k = 0; k < 3; ++k) {
      const double e = u[j][k] - ref.u_ref[k];
      const double d = u[j][k] - before[k];
      j_total += c.q_u[k] * e * e + c.q_du[k] * d * d;
    }
  }

  StateVec lam;
  for (int i = 0; i < 8; ++i) lam[i] = 2.0 * c.q_x[i] * (xs[n][i] - ref.x_ref[i]);
  for (std::size_t jj = n; jj-- > 0;) {
    const InputVec& before = jj == 0 ? u_prev : u[jj - 1];
    const InputVec fu = fu_transpose(xs[jj], params, lam);
    for (int k = 0; k < 3; ++k) {
      double gk = c.dt * fu[k] + 2.0 * c.q_u[k] * (u[jj][k] - ref.u_ref[k]) +
                  2.0 * c.q_du[k] * (u[jj][k] - before[k]);
      if (jj + 1 < n) gk -= 2.0 * c.q_du[k] * (u[jj + 1][k] - u[jj][k]);
      grad[jj][k] = gk;
    }
    if (jj >= 1) {
      const StateVec fx = fx_transpose(xs[jj], u[jj], params, lam);
      for (int i = 0; i < 8; ++i) {
        lam[i] += c.dt * fx[i] + 2.0 * c.q_x[i] * (xs[jj][i] - ref.x_ref[i]);
      }
    }
  }
  return j_total;
}

void project_inputs(std::span<InputVec> u, const InputVec& u_prev, const NmpcConfig& c) {
  InputVec before = u_prev;
  for (int k = 0; k < 3; ++k) before[k] = std::clamp(before[k], c.u_min[k], c.u_max[k]);
  const double rate[3] = {0.0, c.dphi_max, c.dtheta_max};
  for (InputVec& uj : u) {
    for (int k = 0; k < 3; ++k) {
      double v = std::clamp(uj[k], c.u_min[k], c.u_max[k]);
      if (k > 0) {
        const double lo = std::max(c.u_min[k], before[k] - rate[k]);
        const double hi = std::min(c.u_max[k], before[k] + rate[k]);
        v = std::clamp(v, lo, hi);
      }
      uj[k] = v;
    }
    before = uj;
  }
}

NmpcSolution nmpc_solve(const StateVec& x0, const Reference& ref, const InputVec& u_prev,
                        const NmpcConfig& c, const ModelParams& params,
                        std::span<const InputVec> warm) {
  const std::size_t n = static_cast<std::size_t>(c.horizon);
  std::vector<InputVec> u(n, u_prev);
  if (warm.size() == n) std::copy(warm.begin(), warm.end(), u.begin());
  project_inputs(u, u_prev, c);

  std::vector<InputVec> g(n), g_next(n), cand(n);
  double cost = nmpc_cost_gradient(x0, u, ref, u_prev, c, params, g);
  if (!std::isfinite(cost)) {
    throw Error(ErrorCode::kNonFinite, "NMPC rollout cost is not finite");
  }
  NmpcSolution sol;
  sol.sequence = u;
  sol.cost = cost;

  double gamma = c.step_size;
  int it = 0;
  for (; it < c.solver_iters; ++it) {
    // backtrack until the quadratic upper model holds
    double cand_cost = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 50; ++bt) {
      for (std::size_t j = 0; j < n; ++j) {
        for (int k = 0; k < 3; ++k) cand[j][k] = u[j][k] - gamma * g[j][k];
      }
      project_inputs(cand, u_prev, c);
      double model = cost;
      double step_sq = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        for (int k = 0; k < 3; ++k) {
          const double d = cand[j][k] - u[j][k];
          model += g[j][k] * d;
          step_sq += d * d;
        }
      }
      if (step_sq == 0.0) {
        break;
      }
      model += step_sq / (2.0 * gamma);
      cand_cost = nmpc_cost(x0, cand, ref, u_prev, c, params);
      if (std::isfinite(cand_cost) && cand_cost <= model + 1e-12 * std::abs(cost)) {
        accepted = true;
        break;
      }
      gamma *= 0.5;
    }
    if (!accepted) {
      break;
    }
    cand_cost = nmpc_cost_gradient(x0, cand, ref, u_prev, c, params, g_next);

    // Barzilai-Borwein estimate of the next step
    double ss = 0.0;
    double sy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      for (int k = 0; k < 3; ++k) {
        const double s = cand[j][k] - u[j][k];
        ss += s * s;
        sy += s * (g_next[j][k] - g[j][k]);
      }
    }
    u.swap(cand);
    g.swap(g_next);
    cost = cand_cost;
    if (cost < sol.cost) {
      sol.cost = cost;
      sol.sequence = u;
    }
    if (ss < 1e-24) {
      ++it;
      break;
    }
    gamma = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e3) : std::min(gamma * 2.0, 1e3);
  }
  sol.iterations = it;
  sol.first = ControlInput::from(sol.sequence.front());
  return sol;
}

NmpcController::NmpcController(NmpcConfig config, ModelParams params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  params_.validate();
}

NmpcSolution NmpcController::solve(const StateVec& x0, const Reference& ref,
                                   const InputVec& u_prev) {
  std::vector<InputVec> warm;
  if (!plan_.empty()) {
    warm.assign(plan_.begin() + 1, plan_.end());
    warm.push_back(plan_.back());
  }
  NmpcSolution sol = nmpc_solve(x0, ref, u_prev, config_, params_, warm);
  plan_ = sol.sequence;
  return sol;
}

Reference hover_reference(const Vec3& target, const ModelParams& params) {
  Reference r;
  r.x_ref = {target.x, target.y, target.z, 0, 0, 0, 0, 0};
  r.u_ref = {params.g, 0.0, 0.0};
  return r;
}

PrintPath densify(const PrintPath& path, double step, std::vector<std::size_t>* source) {
  if (!(std::isfinite(step) && step > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "densify step must be > 0");
  }
  PrintPath out;
  out.frame = path.frame;
  out.chunk_id = path.chunk_id;
  if (source) source->clear();
  for (std::size_t i = 0; i < path.waypoints.size(); ++i) {
    const Waypoint& w = path.waypoints[i];
    if (i == 0) {
      out.waypoints.push_back(w);
      if (source) source->push_back(0);
      continue;
    }
    const Vec3 from = path.waypoints[i - 1].position;
    const Vec3 d = w.position - from;
    const int pieces = std::max(1, static_cast<int>(std::ceil(norm(d) / step - 1e-9)));
    for (int k = 1; k <= pieces; ++k) {
      Waypoint piece = w;
      if (k < pieces) piece.position = from + d * (static_cast<double>(k) / pieces);
      out.waypoints.push_back(piece);
      if (source) source->push_back(i);
    }
  }
  return out;
}

Reference reference_for(const PrintPath& path, const StateVec& state, std::size_t& cursor,
                        const NmpcConfig& config, const ModelParams& params) {
  if (path.waypoints.empty()) {
    throw Error(ErrorCode::kEmptyInput, "empty path");
  }
  if (cursor >= path.waypoints.size()) {
    throw Error(ErrorCode::kInvalidArgument, "cursor past the end of the path");
  }
  const Vec3 p{state[0], state[1], state[2]};
  if (norm(p - path.waypoints[cursor].position) < config.accept_radius) {
    if (cursor + 1 == path.waypoints.size()) {
      throw Error(ErrorCode::kPathComplete, "last waypoint reached");
    }
    ++cursor;
  }
  return hover_reference(path.waypoints[cursor].position, params);
}

}  // namespace aeroprint
