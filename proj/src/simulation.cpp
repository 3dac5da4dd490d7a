#include "driftsim/simulation.hpp"

#include <cmath>

namespace driftsim {

namespace {

constexpr int kPlantSubsteps = 10;

bool state_is_finite(const VehicleState& s) {
  return std::isfinite(s.beta) && std::isfinite(s.omega) && std::isfinite(s.v) &&
         std::isfinite(s.phi) && std::isfinite(s.x_pos) && std::isfinite(s.y_pos);
}

int status_code(QpStatus s) {
  switch (s) {
    case QpStatus::kOptimal: return 0;
    case QpStatus::kMaxIterations: return 1;
    case QpStatus::kInfeasible: return 2;
  }
  return 2;
}

}  // namespace

std::pair<double, double> tire_utilization(const TireForces& front, const TireForces& rear,
                                           const VehicleParams& params) {
  const AxleLoads loads = static_axle_loads(params);
  const double f = std::hypot(front.fx, front.fy) / (params.mu * loads.f_zf);
  const double r = std::hypot(rear.fx, rear.fy) / (params.mu * loads.f_zr);
  return {f, r};
}

RunResult run(const Scenario& scenario, const RunOptions& options) {
  validate(scenario);
  const auto path = build_path(scenario);
  MpcController controller(scenario.controller, scenario.vehicle, path);
  if (!options.qp_dump_dir.empty()) controller.set_qp_dump_dir(options.qp_dump_dir);
  const InverseTireConfig inv_cfg = actuator_config(scenario);

  VehicleState state = initial_state(scenario, *path);
  const double t_ctrl = scenario.controller.sample_time;
  const int steps = static_cast<int>(std::round(scenario.duration / t_ctrl));

  RunResult result;
  result.records.reserve(steps);
  bool aborted = false;
  std::string abort_reason;

  for (int k = 0; k < steps; ++k) {
    TimeSeriesRecord rec;
    rec.t = k * t_ctrl;
    rec.state = state;

    ControlDiagnostics cdiag;
    ActuatorDiagnostics adiag;
    try {
      rec.u_cmd = controller.control_step(state, &cdiag);
      rec.actuator =
          regulate(rec.u_cmd, state, inv_cfg, scenario.vehicle, scenario.tire, &adiag);
    } catch (const std::exception& e) {
      aborted = true;
      abort_reason = std::string("controller failure at t=") + std::to_string(rec.t) + ": " +
                     e.what();
      break;
    }

    rec.errors = cdiag.errors;
    rec.omega_ref = cdiag.omega_ref;
    rec.s_ref = cdiag.s_ref;
    rec.qp_status = status_code(cdiag.qp_status);
    rec.qp_iterations = cdiag.qp_iterations;
    rec.qp_active = cdiag.active_constraints;
    rec.disturbance_norm = cdiag.disturbance_norm;
    rec.fallback = cdiag.fallback;
    rec.newton_iter_front = adiag.front.iterations;
    rec.newton_iter_rear = adiag.rear.iterations;
    rec.newton_residual_front = adiag.front.residual;
    rec.newton_residual_rear = adiag.rear.residual;
    rec.steer_saturated_front = adiag.front.saturated;
    rec.steer_saturated_rear = adiag.rear.saturated;

    const RealizedForces realized = realized_axle_forces(
        state, rec.actuator.steering(), rec.actuator.torques(), scenario.vehicle, scenario.tire);
    rec.front_tire = realized.front;
    rec.rear_tire = realized.rear;
    std::tie(rec.front_util, rec.rear_util) =
        tire_utilization(realized.front, realized.rear, scenario.vehicle);

    result.records.push_back(rec);

    try {
      const double dt = t_ctrl / kPlantSubsteps;
      for (int i = 0; i < kPlantSubsteps; ++i) {
        state = step(state, rec.actuator.steering(), rec.actuator.torques(), scenario.vehicle,
                     scenario.tire, dt);
      }
    } catch (const ModelValidityError& e) {
      aborted = true;
      abort_reason = std::string("plant left the model envelope at t=") +
                     std::to_string(rec.t) + ": " + e.what();
      break;
    }
    if (!state_is_finite(state)) {
      aborted = true;
      abort_reason = "non-finite plant state at t=" + std::to_string(rec.t);
      break;
    }
  }

  result.metrics = compute_metrics(result.records, t_ctrl, aborted, abort_reason);
  return result;
}

DriftDetection detect_drift(const std::vector<TimeSeriesRecord>& records, double sample_time) {
  DriftDetection det;
  if (records.empty() || sample_time <= 0.0) return det;

  const int sustain = std::max(1, static_cast<int>(std::round(kDriftSustainSeconds / sample_time)));
  auto drifting = [](const TimeSeriesRecord& r) {
    return r.state.beta * r.state.omega < 0.0 && std::abs(r.state.beta) > kDriftBetaMin;
  };

  int run_start = -1;
  for (int i = 0; i < static_cast<int>(records.size()); ++i) {
    if (drifting(records[i])) {
      if (run_start < 0) run_start = i;
      if (i - run_start + 1 >= sustain) {
        det.onset_time = records[run_start].t;
        break;
      }
    } else {
      run_start = -1;
    }
  }

  const double t_end = records.back().t + sample_time;
  if (t_end >= kSteadyWindowSeconds) {
    const double t_begin = t_end - kSteadyWindowSeconds;
    double sum = 0.0, sum2 = 0.0;
    int n = 0;
    for (const auto& r : records) {
      if (r.t < t_begin) continue;
      sum += r.errors.e_d;
      sum2 += r.errors.e_d * r.errors.e_d;
      ++n;
    }
    if (n > 1) {
      const double mean = sum / n;
      const double var = sum2 / n - mean * mean;
      if (var < kSteadyVarianceMax) det.steady_window = std::make_pair(t_begin, t_end);
    }
  }
  return det;
}

RunMetrics compute_metrics(const std::vector<TimeSeriesRecord>& records, double sample_time,
                           bool aborted, const std::string& abort_reason) {
  RunMetrics m;
  m.steps = static_cast<int>(records.size());
  m.sample_time = sample_time;
  m.aborted = aborted;
  m.abort_reason = abort_reason;
  if (records.empty()) return m;

  double sum_sq = 0.0;
  for (const auto& r : records) {
    m.max_abs_lateral_error = std::max(m.max_abs_lateral_error, std::abs(r.errors.e_d));
    sum_sq += r.errors.e_d * r.errors.e_d;
    m.max_front_utilization = std::max(m.max_front_utilization, r.front_util);
    m.max_rear_utilization = std::max(m.max_rear_utilization, r.rear_util);
  }
  m.rms_lateral_error = std::sqrt(sum_sq / records.size());

  const DriftDetection det = detect_drift(records, sample_time);
  m.drift_onset_time = det.onset_time;
  if (det.steady_window && !aborted) {
    const auto [t0, t1] = *det.steady_window;
    double e_sum = 0.0, beta_sum = 0.0, omega_sum = 0.0;
    int n = 0;
    for (const auto& r : records) {
      if (r.t < t0 || r.t >= t1) continue;
      e_sum += r.errors.e_d;
      beta_sum += r.state.beta;
      omega_sum += r.state.omega;
      ++n;
    }
    if (n > 0) {
      m.steady_lateral_error = e_sum / n;
      m.steady_sideslip_deg = beta_sum / n * 180.0 / M_PI;
      m.steady_yaw_rate = omega_sum / n;
    }
  }
  return m;
}

}  // namespace driftsim
