#pragma once

#include <utility>

#include "driftsim/tire.hpp"
#include "driftsim/types.hpp"

namespace driftsim {

/// Time derivative of the plant state.
struct StateDerivative {
  double beta_dot = 0.0;
  double omega_dot = 0.0;
  double v_dot = 0.0;
  double phi_dot = 0.0;
  double x_dot = 0.0;
  double y_dot = 0.0;
};

/// Tire-frame force pair for one axle.
struct TireForces {
  double fx = 0.0;
  double fy = 0.0;
};

/// Forces the plant actually develops for a given actuator setting,
/// in both tire and body frames.
struct RealizedForces {
  TireForces front;
  TireForces rear;
  AxleForceCommand body;
};

/// Minimum velocity for which the single-track equations stay meaningful.
inline constexpr double kVelocityFloor = 0.5;  // [m/s]

/// Rotate tire-frame forces into the body frame (rotation by +delta).
std::pair<double, double> tire_to_body_forces(double fx_tire, double fy_tire, double delta);

/// 3DoF dynamics driven by body-frame axle forces, plus global-pose kinematics.
/// Requires v > 0.
StateDerivative plant_derivatives(const VehicleState& state, const AxleForceCommand& u,
                                  const VehicleParams& params);

/// Tire forces developed at the current state: longitudinal from torque
/// (F_x = T / r, slip ratio neglected), lateral from the slip-angle curve,
/// then clipped so each axle stays on or inside the friction circle.
/// The excess is taken out of the lateral component.
RealizedForces realized_axle_forces(const VehicleState& state, const SteeringAngles& steer,
                                    const AxleTorques& torques, const VehicleParams& params,
                                    const TireParams& tire);

/// One explicit RK4 step of the closed plant (steering and torques held).
/// Tire forces are re-evaluated at every stage state.
/// Throws ModelValidityError if the velocity crosses below kVelocityFloor.
VehicleState step(const VehicleState& state, const SteeringAngles& steer,
                  const AxleTorques& torques, const VehicleParams& params,
                  const TireParams& tire, double dt);

}  // namespace driftsim
