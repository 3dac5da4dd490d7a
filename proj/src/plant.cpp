#include "driftsim/plant.hpp"

#include <algorithm>
#include <cmath>

namespace driftsim {

namespace {

TireForces clip_to_friction_circle(double fx, double fy, double cap) {
  fx = std::clamp(fx, -cap, cap);
  const double fy_max = std::sqrt(std::max(cap * cap - fx * fx, 0.0));
  fy = std::clamp(fy, -fy_max, fy_max);
  return {fx, fy};
}

VehicleState advance(const VehicleState& s, const StateDerivative& d, double h) {
  VehicleState out = s;
  out.beta += h * d.beta_dot;
  out.omega += h * d.omega_dot;
  out.v += h * d.v_dot;
  out.phi += h * d.phi_dot;
  out.x_pos += h * d.x_dot;
  out.y_pos += h * d.y_dot;
  return out;
}

}  // namespace

std::pair<double, double> tire_to_body_forces(double fx_tire, double fy_tire, double delta) {
  const double c = std::cos(delta);
  const double s = std::sin(delta);
  return {fx_tire * c - fy_tire * s, fx_tire * s + fy_tire * c};
}

StateDerivative plant_derivatives(const VehicleState& state, const AxleForceCommand& u,
                                  const VehicleParams& params) {
  if (state.v <= 0.0) {
    throw std::invalid_argument("plant_derivatives: v must be positive");
  }
  const double sb = std::sin(state.beta);
  const double cb = std::cos(state.beta);
  const double fx_sum = u.fxf + u.fxr;
  const double fy_sum = u.fyf + u.fyr;

  StateDerivative d;
  d.beta_dot = (fy_sum * cb - fx_sum * sb) / (params.m * state.v) - state.omega;
  d.omega_dot = (params.a * u.fyf - params.b * u.fyr) / params.i_z;
  d.v_dot = (fx_sum * cb + fy_sum * sb) / params.m;
  d.phi_dot = state.omega;
  d.x_dot = state.v * std::cos(state.phi + state.beta);
  d.y_dot = state.v * std::sin(state.phi + state.beta);
  return d;
}

RealizedForces realized_axle_forces(const VehicleState& state, const SteeringAngles& steer,
                                    const AxleTorques& torques, const VehicleParams& params,
                                    const TireParams& tire) {
  const auto [alpha_f, alpha_r] = slip_angles(state, steer, params);
  const AxleLoads loads = static_axle_loads(params);

  const double cap_f = params.mu * loads.f_zf;
  const double cap_r = params.mu * loads.f_zr;
  const TireForces front = clip_to_friction_circle(
      torques.t_f / params.r, lateral_tire_force(alpha_f, loads.f_zf, params.mu, tire), cap_f);
  const TireForces rear = clip_to_friction_circle(
      torques.t_r / params.r, lateral_tire_force(alpha_r, loads.f_zr, params.mu, tire), cap_r);

  const auto [fxf_body, fyf_body] = tire_to_body_forces(front.fx, front.fy, steer.delta_f);
  const auto [fxr_body, fyr_body] = tire_to_body_forces(rear.fx, rear.fy, steer.delta_r);
  return {front, rear, {fxf_body, fxr_body, fyf_body, fyr_body}};
}

VehicleState step(const VehicleState& state, const SteeringAngles& steer,
                  const AxleTorques& torques, const VehicleParams& params,
                  const TireParams& tire, double dt) {
  if (dt <= 0.0) {
    throw std::invalid_argument("step: dt must be positive");
  }
  auto deriv = [&](const VehicleState& s) {
    if (s.v < kVelocityFloor) {
      throw ModelValidityError("plant velocity fell below the 0.5 m/s model floor");
    }
    if (std::cos(s.beta) <= 0.0) {
      throw ModelValidityError("plant sideslip magnitude reached pi/2");
    }
    return plant_derivatives(s, realized_axle_forces(s, steer, torques, params, tire).body, params);
  };

  const StateDerivative k1 = deriv(state);
  const StateDerivative k2 = deriv(advance(state, k1, 0.5 * dt));
  const StateDerivative k3 = deriv(advance(state, k2, 0.5 * dt));
  const StateDerivative k4 = deriv(advance(state, k3, dt));

  VehicleState out = state;
  const double w = dt / 6.0;
  out.beta += w * (k1.beta_dot + 2.0 * k2.beta_dot + 2.0 * k3.beta_dot + k4.beta_dot);
  out.omega += w * (k1.omega_dot + 2.0 * k2.omega_dot + 2.0 * k3.omega_dot + k4.omega_dot);
  out.v += w * (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot);
  out.phi += w * (k1.phi_dot + 2.0 * k2.phi_dot + 2.0 * k3.phi_dot + k4.phi_dot);
  out.x_pos += w * (k1.x_dot + 2.0 * k2.x_dot + 2.0 * k3.x_dot + k4.x_dot);
  out.y_pos += w * (k1.y_dot + 2.0 * k2.y_dot + 2.0 * k3.y_dot + k4.y_dot);

  if (out.v < kVelocityFloor) {
    throw ModelValidityError("plant velocity fell below the 0.5 m/s model floor");
  }
  return out;
}

}  // namespace driftsim
