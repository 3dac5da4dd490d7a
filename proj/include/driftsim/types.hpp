#pragma once

#include <stdexcept>

namespace driftsim {

/// Thrown when the simulation leaves the validity envelope of the
/// single-track model (e.g. velocity dropping below the model floor).
struct ModelValidityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Lumped single-track (bicycle) vehicle parameters. All quantities SI.
struct VehicleParams {
  double m = 1600.0;     ///< mass [kg]
  double i_z = 1536.7;   ///< yaw inertia [kg m^2]
  double a = 1.015;      ///< CG to front axle [m]
  double b = 1.895;      ///< CG to rear axle [m]
  double r = 0.325;      ///< wheel radius [m]
  double mu = 1.0;       ///< road adhesion coefficient [-]
  double g = 9.81;       ///< gravity [m/s^2]
};

/// Lateral force curve factors, F_y = mu*F_z*sin(C*atan(B*alpha)).
/// B is negative: positive slip angle yields negative lateral force.
struct TireParams {
  double b_stiff = -11.52;  ///< stiffness factor [-]
  double c_shape = 1.62;    ///< shape factor [-], > 1 so the curve reaches mu*F_z
};

/// Planar 3DoF state plus global pose. Valid only for v > 0 and |beta| < pi/2.
struct VehicleState {
  double beta = 0.0;   ///< sideslip angle [rad]
  double omega = 0.0;  ///< yaw rate [rad/s], counterclockwise positive
  double v = 0.0;      ///< velocity magnitude [m/s]
  double phi = 0.0;    ///< yaw angle [rad]
  double x_pos = 0.0;  ///< global position [m]
  double y_pos = 0.0;
};

/// Body-frame axle force command, the control vector of the upper layer.
struct AxleForceCommand {
  double fxf = 0.0;  ///< front axle longitudinal [N]
  double fxr = 0.0;  ///< rear axle longitudinal [N]
  double fyf = 0.0;  ///< front axle lateral [N]
  double fyr = 0.0;  ///< rear axle lateral [N]
};

struct SteeringAngles {
  double delta_f = 0.0;  ///< front wheel steering angle [rad]
  double delta_r = 0.0;  ///< rear wheel steering angle [rad]
};

struct AxleTorques {
  double t_f = 0.0;  ///< front axle drive torque [N m]
  double t_r = 0.0;  ///< rear axle drive torque [N m]
};

/// Static vertical axle loads.
struct AxleLoads {
  double f_zf = 0.0;  ///< front axle load [N]
  double f_zr = 0.0;  ///< rear axle load [N]
};

/// Static load split by lever arms; the planar model carries no load transfer.
AxleLoads static_axle_loads(const VehicleParams& p);

void validate(const VehicleParams& p);
void validate(const TireParams& t);

}  // namespace driftsim
