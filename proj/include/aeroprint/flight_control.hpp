#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "aeroprint/toolpath.hpp"
#include "aeroprint/vec3.hpp"

namespace aeroprint {

/// [px, py, pz, vx, vy, vz, phi, theta]
using StateVec = std::array<double, 8>;
/// [thrust (m/s^2, mass normalised), phi_ref, theta_ref]
using InputVec = std::array<double, 3>;

struct UavState {
  Vec3 p;
  Vec3 v;
  double phi = 0.0;
  double theta = 0.0;

  StateVec vec() const { return {p.x, p.y, p.z, v.x, v.y, v.z, phi, theta}; }
  static UavState from(const StateVec& x) {
    return {{x[0], x[1], x[2]}, {x[3], x[4], x[5]}, x[6], x[7]};
  }
  friend bool operator==(const UavState&, const UavState&) = default;
};

struct ControlInput {
  double thrust = 0.0;
  double phi_ref = 0.0;
  double theta_ref = 0.0;

  InputVec vec() const { return {thrust, phi_ref, theta_ref}; }
  static ControlInput from(const InputVec& u) { return {u[0], u[1], u[2]}; }
  friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

struct ModelParams {
  double a_x = 0.1;  // 1/s linear damping
  double a_y = 0.1;
  double a_z = 0.2;
  double tau_phi = 0.4;  // s
  double tau_theta = 0.47;
  double k_phi = 1.0;
  double k_theta = 1.0;
  double g = 9.81;  // m/s^2, acting along -z

  void validate() const;
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct NmpcConfig {
  int horizon = 40;
  double dt = 0.05;  // s
  std::array<double, 8> q_x{15, 15, 25, 4, 4, 4, 8, 8};
  std::array<double, 3> q_u{3, 15, 15};
  std::array<double, 3> q_du{3, 15, 15};
  InputVec u_min{3.0, -0.2, -0.2};
  InputVec u_max{15.5, 0.2, 0.2};
  double dphi_max = 0.04;    // rad per step
  double dtheta_max = 0.04;  // rad per step
  int solver_iters = 60;
  // Initial step of the projected-gradient iteration; later steps come
  // from backtracking and Barzilai-Borwein estimates.
  double step_size = 1e-3;
  double accept_radius = 0.05;  // m
  // Spacing of the sub-waypoints the reference walks along.
  double ref_step = 0.005;  // m

  void validate() const;
  friend bool operator==(const NmpcConfig&, const NmpcConfig&) = default;
};

/// Continuous dynamics with zero yaw: thrust acceleration
/// (T sin(theta) cos(phi), -T sin(phi), T cos(theta) cos(phi)), gravity
/// (0, 0, -g), linear damping, first-order attitude response.
StateVec dynamics_derivative(const StateVec& x, const InputVec& u, const ModelParams& params);
StateVec step_euler(const StateVec& x, const InputVec& u, const ModelParams& params, double dt);

struct Reference {
  StateVec x_ref{};
  InputVec u_ref{};
};

/// Horizon cost of the input sequence `u` (one entry per step) started from
/// x0. State terms cover x_1..x_N, input and rate terms u_0..u_{N-1}; the
/// rate term of u_0 is taken against `u_prev`, the input applied last.
double nmpc_cost(const StateVec& x0, std::span<const InputVec> u, const Reference& ref,
                 const InputVec& u_prev, const NmpcConfig& config, const ModelParams& params);

/// Same cost, with its gradient written to `grad` (size N) by a reverse
/// sweep through the Euler rollout.
double nmpc_cost_gradient(const StateVec& x0, std::span<const InputVec> u, const Reference& ref,
                          const InputVec& u_prev, const NmpcConfig& config,
                          const ModelParams& params, std::span<InputVec> grad);

/// Makes the sequence feasible in place: each input is clamped to the box,
/// then its angle references to within the rate limit of the preceding
/// input (u_prev for the first).
void project_inputs(std::span<InputVec> u, const InputVec& u_prev, const NmpcConfig& config);

struct NmpcSolution {
  ControlInput first;
  double cost = 0.0;
  int iterations = 0;
  std::vector<InputVec> sequence;
};

/// Projected-gradient single shooting. `warm`, when non-empty, seeds the
/// sequence (it is not shifted here). Throws NonFinite when the rollout
/// cost is not finite.
NmpcSolution nmpc_solve(const StateVec& x0, const Reference& ref, const InputVec& u_prev,
                        const NmpcConfig& config, const ModelParams& params,
                        std::span<const InputVec> warm = {});

/// Receding-horizon wrapper that warm-starts each solve from the previous
/// plan shifted by one step.
class NmpcController {
 public:
  NmpcController(NmpcConfig config, ModelParams params);

  NmpcSolution solve(const StateVec& x0, const Reference& ref, const InputVec& u_prev);
  void reset() { plan_.clear(); }
  const NmpcConfig& config() const { return config_; }
  const ModelParams& params() const { return params_; }

 private:
  NmpcConfig config_;
  ModelParams params_;
  std::vector<InputVec> plan_;
};

/// Hover reference at `target`.
Reference hover_reference(const Vec3& target, const ModelParams& params);

/// Splits every move into pieces no longer than `step`, keeping each
/// piece's extrude flag. `source`, when given, receives for each output
/// waypoint the index of the input waypoint its move belongs to.
PrintPath densify(const PrintPath& path, double step, std::vector<std::size_t>* source = nullptr);

/// Hover reference at the waypoint under `cursor`. When the UAV is within
/// accept_radius of it the cursor moves on by one first; at the last
/// waypoint that raises PathComplete instead.
Reference reference_for(const PrintPath& path, const StateVec& state, std::size_t& cursor,
                        const NmpcConfig& config, const ModelParams& params);

}  // namespace aeroprint
