#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "driftsim/tire.hpp"
#include "driftsim/types.hpp"

namespace driftsim {

enum class Axle { kFront, kRear };

struct InverseTireConfig {
  double epsilon = 0.0;       ///< saturation proximity threshold [N]
  double tolerance = 1e-6;    ///< Newton convergence tolerance [rad]
  int max_iter = 25;
  double delta_max = 35.0 * M_PI / 180.0;  ///< steering bound [rad]
};

/// Threshold defaulted to 2% of the friction budget: small enough that the
/// secondary branch only appears near true saturation, large enough to stay
/// clear of the arcsin-derivative blow-up.
InverseTireConfig default_inverse_tire_config(double mu_f_z);

void validate(const InverseTireConfig& cfg);

/// Slip angle(s) producing a requested tire-frame lateral force.
struct InverseLateralResult {
  double alpha = 0.0;  ///< minimal-magnitude (linear-region) branch
  std::optional<double> alpha_secondary;  ///< far side of the force peak, near saturation only
};

/// Invert the lateral force curve. The principal branch is
/// (1/B) tan(arcsin(F_y / (mu F_z)) / C); within `epsilon` of saturation the
/// secondary branch (1/B) tan((sign * pi - arcsin(..)) / C) is also reported.
/// Throws if |F_y| exceeds mu*F_z — callers clamp first.
InverseLateralResult inverse_lateral(double f_y, double f_z, double mu, const TireParams& tire,
                                     double epsilon);

/// Body-frame force command rotated into the tire frame (rotation by -delta).
std::pair<double, double> body_to_tire_forces(double f_x_body, double f_y_body, double delta);

/// Steering consistency residual: the slip angle demanded by the rotated
/// lateral force minus the slip angle the kinematics deliver at `delta`.
/// Propagates the inverse-model saturation error; see solve_steering for the
/// clamped variant used inside the iteration.
double steering_residual(double delta, double f_x_body, double f_y_body,
                         const VehicleState& state, Axle axle, const VehicleParams& params,
                         const TireParams& tire);

struct SteeringSolveResult {
  double delta = 0.0;
  int iterations = 0;
  double residual = 0.0;   ///< |L(delta)| at the returned angle
  bool converged = false;
  bool saturated = false;  ///< hit the steering bound
  bool near_saturation = false;  ///< lateral demand within epsilon of the friction limit
};

/// Newton iteration for the steering angle realizing a body-frame force
/// command, starting from zero, with the lateral demand clamped to the
/// friction limit inside the loop and the angle saturated to +/-delta_max
/// every step. Non-convergence returns the last iterate, flagged.
SteeringSolveResult solve_steering(double f_x_body, double f_y_body, const VehicleState& state,
                                   Axle axle, const InverseTireConfig& cfg,
                                   const VehicleParams& params, const TireParams& tire);

/// Drive torque producing the longitudinal tire force implied by the command
/// at steering angle delta.
double axle_torque(double f_x_body, double f_y_body, double delta, double wheel_radius);

struct ActuatorCommand {
  double delta_f = 0.0;
  double delta_r = 0.0;
  double t_f = 0.0;
  double t_r = 0.0;

  SteeringAngles steering() const { return {delta_f, delta_r}; }
  AxleTorques torques() const { return {t_f, t_r}; }
};

struct ActuatorDiagnostics {
  SteeringSolveResult front;
  SteeringSolveResult rear;
};

/// Lower layer: convert the commanded body-frame axle forces into steering
/// angles and axle torques, front and rear solved independently.
ActuatorCommand regulate(const AxleForceCommand& u, const VehicleState& state,
                         const InverseTireConfig& cfg, const VehicleParams& params,
                         const TireParams& tire, ActuatorDiagnostics* diag = nullptr);

}  // namespace driftsim
