#include "driftsim/tire.hpp"

#include <cmath>

namespace driftsim {

double lateral_tire_force(double alpha, double f_z, double mu, const TireParams& tire) {
  return mu * f_z * std::sin(tire.c_shape * std::atan(tire.b_stiff * alpha));
}

double axle_velocity_angle(const VehicleState& state, double lever) {
  if (state.v <= 0.0) {
    throw std::invalid_argument("axle_velocity_angle: v must be positive");
  }
  const double cb = std::cos(state.beta);
  if (cb <= 0.0) {
    throw std::invalid_argument("axle_velocity_angle: |beta| must be below pi/2");
  }
  return std::atan((state.v * std::sin(state.beta) + lever * state.omega) / (state.v * cb));
}

std::pair<double, double> slip_angles(const VehicleState& state,
                                      const SteeringAngles& steer,
                                      const VehicleParams& params) {
  const double alpha_f = axle_velocity_angle(state, params.a) - steer.delta_f;
  const double alpha_r = axle_velocity_angle(state, -params.b) - steer.delta_r;
  return {alpha_f, alpha_r};
}

}  // namespace driftsim
