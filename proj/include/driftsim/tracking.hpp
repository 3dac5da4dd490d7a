#pragma once

#include <Eigen/Core>

#include "driftsim/path.hpp"
#include "driftsim/types.hpp"

namespace driftsim {

/// Path-relative error state, the state vector of the tracking controller.
struct TrackingError {
  double e_d = 0.0;      ///< lateral error [m], positive left of the tangent
  double e_phi = 0.0;    ///< tangential error phi - phi_r + beta, wrapped to (-pi, pi]
  double e_v = 0.0;      ///< velocity error [m/s]
  double e_omega = 0.0;  ///< yaw-rate error [rad/s]

  Eigen::Vector4d vec() const { return {e_d, e_phi, e_v, e_omega}; }
};

struct YawRateGains {
  double k1 = 0.15;  ///< lateral-error gain [1/(m s)]
  double k2 = 0.1;   ///< tangential-error gain [1/s]
};

/// Discrete path-relative model x_{k+1} = A_d x + B_d u.
struct LinearModel {
  Eigen::Matrix4d a_d = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d b_d = Eigen::Matrix4d::Zero();
  double sample_time = 0.0;
};

double wrap_angle(double angle);

/// Tracking errors of `state` relative to the projected reference point.
TrackingError tracking_errors(const VehicleState& state, const ReferencePoint& ref,
                              double omega_des);

/// Curvature feedforward plus lateral/tangential error feedback.
/// Rejects configurations where 1 - e_d * kappa_r vanishes.
double desired_yaw_rate(double e_d, double e_phi, const ReferencePoint& ref,
                        const YawRateGains& gains);

/// Continuous-time error-state Jacobians discretized by forward Euler.
/// `couple_yaw_rate_error` inserts the e_omega -> e_phi_dot coupling that the
/// default model omits (the sideslip-rate contribution cancels it exactly when
/// the input matrix carries the force terms; the flag exists for comparison).
LinearModel linearize(const ReferencePoint& ref, double beta, double v,
                      const VehicleParams& params, double sample_time,
                      bool couple_yaw_rate_error = false);

}  // namespace driftsim
