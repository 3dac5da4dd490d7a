#pragma once

#include <utility>

#include "driftsim/types.hpp"

namespace driftsim {

/// Saturating lateral force curve: mu*F_z*sin(C*atan(B*alpha)).
/// Total function; |result| <= mu*F_z for all alpha.
double lateral_tire_force(double alpha, double f_z, double mu, const TireParams& tire);

/// Velocity angle at an axle relative to the body x-axis:
/// atan((v*sin(beta) + lever*omega) / (v*cos(beta))).
/// lever is +a for the front axle and -b for the rear axle.
/// Requires v > 0 and cos(beta) > 0.
double axle_velocity_angle(const VehicleState& state, double lever);

/// Front and rear tire slip angles for the given steering angles.
std::pair<double, double> slip_angles(const VehicleState& state,
                                      const SteeringAngles& steer,
                                      const VehicleParams& params);

}  // namespace driftsim
