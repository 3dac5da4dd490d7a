#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "driftsim/actuator.hpp"
#include "driftsim/mpc.hpp"
#include "driftsim/plant.hpp"
#include "driftsim/scenario.hpp"

namespace driftsim {

/// One control period of the closed loop.
struct TimeSeriesRecord {
  double t = 0.0;
  VehicleState state;          // measured at the period start
  TrackingError errors;
  double omega_ref = 0.0;
  double s_ref = 0.0;
  AxleForceCommand u_cmd;      // upper-layer command for this period
  ActuatorCommand actuator;    // lower-layer realization
  TireForces front_tire;       // forces the plant develops at the period start
  TireForces rear_tire;
  double front_util = 0.0;
  double rear_util = 0.0;
  int qp_status = 0;           // 0 optimal, 1 max-iterations, 2 infeasible
  int qp_iterations = 0;
  int qp_active = 0;
  double disturbance_norm = 0.0;
  bool fallback = false;
  int newton_iter_front = 0;
  int newton_iter_rear = 0;
  double newton_residual_front = 0.0;
  double newton_residual_rear = 0.0;
  bool steer_saturated_front = false;
  bool steer_saturated_rear = false;
};

struct RunMetrics {
  int steps = 0;
  double sample_time = 0.0;
  bool aborted = false;
  std::string abort_reason;
  double max_abs_lateral_error = 0.0;
  double rms_lateral_error = 0.0;
  std::optional<double> steady_lateral_error;  // mean over the steady window, signed
  std::optional<double> drift_onset_time;
  std::optional<double> steady_sideslip_deg;
  std::optional<double> steady_yaw_rate;
  double max_front_utilization = 0.0;
  double max_rear_utilization = 0.0;
};

struct RunResult {
  std::vector<TimeSeriesRecord> records;
  RunMetrics metrics;
};

struct DriftDetection {
  std::optional<double> onset_time;
  /// Final-window bounds [t_begin, t_end], present when the lateral error has
  /// settled (variance below kSteadyVarianceMax).
  std::optional<std::pair<double, double>> steady_window;
};

/// Length of the steady-state evaluation window at the end of a run.
inline constexpr double kSteadyWindowSeconds = 20.0;
/// Lateral-error variance ceiling for declaring the final window settled.
inline constexpr double kSteadyVarianceMax = 0.25;  // [m^2]
/// Drift onset: |beta| above this with beta and omega of opposite sign...
inline constexpr double kDriftBetaMin = 5.0 * M_PI / 180.0;
/// ...sustained for at least this long.
inline constexpr double kDriftSustainSeconds = 1.0;

struct RunOptions {
  /// When nonempty, every control-step QP is dumped into this directory.
  std::string qp_dump_dir;
};

/// Closed loop at the controller rate with 10 plant substeps per period.
/// A model-validity violation or non-finite state aborts the run with a
/// diagnosis in the metrics; records up to the failure are kept.
RunResult run(const Scenario& scenario, const RunOptions& options = {});

/// Drift onset (opposite-signed sideslip and yaw rate, sustained) and the
/// settled terminal window of a completed record stream.
DriftDetection detect_drift(const std::vector<TimeSeriesRecord>& records, double sample_time);

/// Combined tire force magnitude over the friction budget, per axle.
std::pair<double, double> tire_utilization(const TireForces& front, const TireForces& rear,
                                           const VehicleParams& params);

/// Metrics of a completed record stream (also used to recompute from CSV).
RunMetrics compute_metrics(const std::vector<TimeSeriesRecord>& records, double sample_time,
                           bool aborted, const std::string& abort_reason);

}  // namespace driftsim
