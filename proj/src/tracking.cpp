#include "driftsim/tracking.hpp"

#include <cmath>

namespace driftsim {

double wrap_angle(double angle) {
  const double two_pi = 2.0 * M_PI;
  double a = std::fmod(angle + M_PI, two_pi);
  if (a <= 0.0) a += two_pi;
  return a - M_PI;
}

TrackingError tracking_errors(const VehicleState& state, const ReferencePoint& ref,
                              double omega_des) {
  TrackingError e;
  e.e_d = lateral_offset({state.x_pos, state.y_pos}, ref);
  e.e_phi = wrap_angle(state.phi - ref.heading + state.beta);
  e.e_v = state.v - ref.speed;
  e.e_omega = state.omega - omega_des;
  return e;
}

double desired_yaw_rate(double e_d, double e_phi, const ReferencePoint& ref,
                        const YawRateGains& gains) {
  const double denom = 1.0 - e_d * ref.curvature;
  if (std::abs(denom) < 1e-6) {
    throw std::invalid_argument("desired_yaw_rate: 1 - e_d * kappa is singular");
  }
  return -ref.curvature * ref.speed * std::cos(e_phi) / denom - gains.k1 * e_d -
         gains.k2 * e_phi;
}

LinearModel linearize(const ReferencePoint& ref, double beta, double v,
                      const VehicleParams& params, double sample_time,
                      bool couple_yaw_rate_error) {
  if (v <= 0.0) {
    throw std::invalid_argument("linearize: v must be positive");
  }
  const double kr = ref.curvature;
  const double vr = ref.speed;
  const double sb = std::sin(beta);
  const double cb = std::cos(beta);

  Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
  a(0, 1) = vr;
  a(1, 0) = kr * kr * vr;
  a(1, 2) = -kr;
  if (couple_yaw_rate_error) a(1, 3) = 1.0;

  Eigen::Matrix4d b = Eigen::Matrix4d::Zero();
  b(1, 0) = -sb / (params.m * v);
  b(1, 1) = -sb / (params.m * v);
  b(1, 2) = cb / (params.m * v);
  b(1, 3) = cb / (params.m * v);
  b(2, 0) = cb / params.m;
  b(2, 1) = cb / params.m;
  b(2, 2) = sb / params.m;
  b(2, 3) = sb / params.m;
  b(3, 2) = params.a / params.i_z;
  b(3, 3) = -params.b / params.i_z;

  LinearModel model;
  model.a_d = Eigen::Matrix4d::Identity() + sample_time * a;
  model.b_d = sample_time * b;
  model.sample_time = sample_time;
  return model;
}

}  // namespace driftsim
