#include "driftsim/actuator.hpp"

#include <algorithm>
#include <cmath>

namespace driftsim {

namespace {

double axle_lever(Axle axle, const VehicleParams& p) {
  return axle == Axle::kFront ? p.a : -p.b;
}

double axle_load(Axle axle, const VehicleParams& p) {
  const AxleLoads loads = static_axle_loads(p);
  return axle == Axle::kFront ? loads.f_zf : loads.f_zr;
}

double principal_alpha(double f_y, double cap, const TireParams& tire) {
  const double g = std::asin(std::clamp(f_y / cap, -1.0, 1.0));
  return std::tan(g / tire.c_shape) / tire.b_stiff;
}

// d(alpha)/d(F_y) of the principal branch; singular at |F_y| = cap.
double principal_alpha_derivative(double f_y, double cap, const TireParams& tire) {
  const double g = std::asin(std::clamp(f_y / cap, -1.0, 1.0));
  const double t = std::cos(g / tire.c_shape);
  const double root = std::sqrt(std::max(cap * cap - f_y * f_y, 0.0));
  return 1.0 / (tire.b_stiff * tire.c_shape * t * t * root);
}

struct ClampedResidual {
  double value = 0.0;
  bool clamped = false;
};

ClampedResidual clamped_residual(double delta, double f_x, double f_y, double kin_angle,
                                 double cap, const TireParams& tire) {
  double fy_tire = -f_x * std::sin(delta) + f_y * std::cos(delta);
  ClampedResidual r;
  if (std::abs(fy_tire) > cap) {
    fy_tire = std::copysign(cap, fy_tire);
    r.clamped = true;
  }
  r.value = principal_alpha(fy_tire, cap, tire) - kin_angle + delta;
  return r;
}

}  // namespace

InverseTireConfig default_inverse_tire_config(double mu_f_z) {
  InverseTireConfig cfg;
  cfg.epsilon = 0.02 * mu_f_z;
  return cfg;
}

void validate(const InverseTireConfig& cfg) {
  if (cfg.epsilon <= 0.0) throw std::invalid_argument("inverse tire: epsilon must be positive");
  if (cfg.tolerance <= 0.0) throw std::invalid_argument("inverse tire: tolerance must be positive");
  if (cfg.max_iter < 1) throw std::invalid_argument("inverse tire: max_iter must be at least 1");
  if (cfg.delta_max <= 0.0) throw std::invalid_argument("inverse tire: delta_max must be positive");
}

InverseLateralResult inverse_lateral(double f_y, double f_z, double mu, const TireParams& tire,
                                     double epsilon) {
  if (f_z <= 0.0 || mu <= 0.0) {
    throw std::invalid_argument("inverse_lateral: mu and F_z must be positive");
  }
  const double cap = mu * f_z;
  if (std::abs(f_y) > cap) {
    throw std::invalid_argument(
        "inverse_lateral: |F_y| exceeds the friction limit (upstream clamp missing)");
  }
  InverseLateralResult res;
  res.alpha = principal_alpha(f_y, cap, tire);
  if (cap - std::abs(f_y) < epsilon) {
    const double g = std::asin(f_y / cap);
    const double sign = f_y >= 0.0 ? 1.0 : -1.0;
    res.alpha_secondary = std::tan((sign * M_PI - g) / tire.c_shape) / tire.b_stiff;
  }
  return res;
}

std::pair<double, double> body_to_tire_forces(double f_x_body, double f_y_body, double delta) {
  const double c = std::cos(delta);
  const double s = std::sin(delta);
  return {f_x_body * c + f_y_body * s, -f_x_body * s + f_y_body * c};
}

double steering_residual(double delta, double f_x_body, double f_y_body,
                         const VehicleState& state, Axle axle, const VehicleParams& params,
                         const TireParams& tire) {
  const double fy_tire = -f_x_body * std::sin(delta) + f_y_body * std::cos(delta);
  // Propagate the saturation error; the Newton loop clamps instead.
  const InverseLateralResult inv =
      inverse_lateral(fy_tire, axle_load(axle, params), params.mu, tire, 0.0);
  return inv.alpha - axle_velocity_angle(state, axle_lever(axle, params)) + delta;
}

SteeringSolveResult solve_steering(double f_x_body, double f_y_body, const VehicleState& state,
                                   Axle axle, const InverseTireConfig& cfg,
                                   const VehicleParams& params, const TireParams& tire) {
  validate(cfg);
  const double cap = params.mu * axle_load(axle, params);
  const double kin_angle = axle_velocity_angle(state, axle_lever(axle, params));

  auto residual = [&](double d) {
    return clamped_residual(d, f_x_body, f_y_body, kin_angle, cap, tire);
  };
  auto derivative = [&](double d, const ClampedResidual& at) {
    const double fy_tire = -f_x_body * std::sin(d) + f_y_body * std::cos(d);
    if (!at.clamped && std::abs(fy_tire) < cap * (1.0 - 1e-9)) {
      const double dfy = -f_x_body * std::cos(d) - f_y_body * std::sin(d);
      return principal_alpha_derivative(fy_tire, cap, tire) * dfy + 1.0;
    }
    // Near or past saturation the analytic form blows up; fall back to a
    // central difference of the clamped residual.
    const double h = 1e-6;
    return (residual(d + h).value - residual(d - h).value) / (2.0 * h);
  };

  SteeringSolveResult out;
  double delta = 0.0;
  for (out.iterations = 0; out.iterations < cfg.max_iter; ++out.iterations) {
    const ClampedResidual l = residual(delta);
    double lp = derivative(delta, l);
    if (std::abs(lp) < 1e-9) lp = lp < 0.0 ? -1.0 : 1.0;  // degenerate slope guard
    double next = delta - l.value / lp;
    next = std::clamp(next, -cfg.delta_max, cfg.delta_max);
    const bool done = std::abs(next - delta) < cfg.tolerance;
    delta = next;
    if (done) {
      out.converged = true;
      ++out.iterations;
      break;
    }
  }
  out.delta = delta;
  out.residual = std::abs(residual(delta).value);
  out.saturated = std::abs(std::abs(delta) - cfg.delta_max) < 1e-12;
  const double fy_final = -f_x_body * std::sin(delta) + f_y_body * std::cos(delta);
  out.near_saturation = cap - std::abs(std::clamp(fy_final, -cap, cap)) < cfg.epsilon;
  return out;
}

double axle_torque(double f_x_body, double f_y_body, double delta, double wheel_radius) {
  return (f_x_body * std::cos(delta) + f_y_body * std::sin(delta)) * wheel_radius;
}

ActuatorCommand regulate(const AxleForceCommand& u, const VehicleState& state,
                         const InverseTireConfig& cfg, const VehicleParams& params,
                         const TireParams& tire, ActuatorDiagnostics* diag) {
  const SteeringSolveResult front =
      solve_steering(u.fxf, u.fyf, state, Axle::kFront, cfg, params, tire);
  const SteeringSolveResult rear =
      solve_steering(u.fxr, u.fyr, state, Axle::kRear, cfg, params, tire);

  ActuatorCommand cmd;
  cmd.delta_f = front.delta;
  cmd.delta_r = rear.delta;
  cmd.t_f = axle_torque(u.fxf, u.fyf, front.delta, params.r);
  cmd.t_r = axle_torque(u.fxr, u.fyr, rear.delta, params.r);
  if (diag != nullptr) {
    diag->front = front;
    diag->rear = rear;
  }
  return cmd;
}

}  // namespace driftsim
