#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>
#include <string>

#include "driftsim/path.hpp"
#include "driftsim/qp.hpp"
#include "driftsim/tracking.hpp"
#include "driftsim/types.hpp"

namespace driftsim {

struct MpcConfig {
  int np = 30;  ///< prediction horizon [steps]
  int nc = 8;   ///< control horizon [steps]
  Eigen::Matrix4d q = Eigen::Vector4d{2900.0, 2000.0, 1000.0, 7500.0}.asDiagonal();
  Eigen::Matrix4d r = Eigen::Vector4d{1.0, 1.0, 0.01, 0.01}.asDiagonal();
  double sample_time = 0.05;     ///< [s]
  double gamma = 0.98;           ///< horizon attenuation of the disturbance correction
  double dfx_max = 1500.0;       ///< longitudinal force rate limit [N/s]
  double dfy_max = 14000.0;      ///< lateral force rate limit [N/s]
  bool compensation_enabled = true;
  double filter_cutoff_hz = 1.0; ///< disturbance low-pass cutoff
  YawRateGains yaw_gains;
  bool couple_yaw_rate_error = false;
  double qp_tol = 1e-8;
  int qp_max_iter = 200;
};

void validate(const MpcConfig& cfg);

/// Incremental-form model: state [x; u], input delta-u, output x.
struct AugmentedModel {
  Eigen::Matrix<double, 8, 8> a_bar;
  Eigen::Matrix<double, 8, 4> b_bar;
  Eigen::Matrix<double, 4, 8> c_out;
};

/// Stacked prediction over np steps with nc free increment blocks:
/// Y = psi * x_bar + theta * delta_u.
struct PredictionMatrices {
  Eigen::MatrixXd psi;    // (4*np) x 8
  Eigen::MatrixXd theta;  // (4*np) x (4*nc)
};

/// First-order low-pass state of the model-mismatch estimate.
struct DisturbanceState {
  Eigen::Vector4d d_raw = Eigen::Vector4d::Zero();
  Eigen::Vector4d d_filt = Eigen::Vector4d::Zero();
};

/// Linear inequality block over the stacked increments.
struct IneqConstraints {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};

AugmentedModel augment(const LinearModel& model);

PredictionMatrices build_prediction(const AugmentedModel& aug, int np, int nc);

/// Inscribed-octagon friction constraints on the absolute axle forces at every
/// predicted step, written over the stacked increments (increments frozen
/// after nc). Eight half-planes per axle per step; the right-hand side
/// mu*F_z*cos(pi/8) keeps the polytope inside the friction circle.
IneqConstraints octagon_constraints(double mu, const AxleLoads& loads,
                                    const AxleForceCommand& u_prev, int np, int nc);

/// Residual between the measured state and the one-step nominal prediction,
/// low-pass filtered at cfg.filter_cutoff_hz.
DisturbanceState estimate_disturbance(const Eigen::Vector4d& x_measured_next,
                                      const Eigen::Vector4d& x_k, const Eigen::Vector4d& u_k,
                                      const LinearModel& model, const DisturbanceState& prev,
                                      const MpcConfig& cfg);

/// Stacked disturbance propagation with per-step geometric attenuation:
/// block i = gamma^i * (sum_{j<i} A^j) * d, using the error-state partition
/// of the augmented model.
Eigen::VectorXd correction_vector(const Eigen::Vector4d& d_filt, const AugmentedModel& aug,
                                  int np, double gamma);

/// Assemble the dense QP over the stacked increments. d_corr shifts the free
/// response when present; box bounds implement the force rate limits.
QpProblem build_qp(const Eigen::Matrix<double, 8, 1>& x_bar, const PredictionMatrices& pred,
                   const Eigen::VectorXd& y_ref, const Eigen::VectorXd* d_corr,
                   const MpcConfig& cfg, const IneqConstraints& constraints);

struct ControlDiagnostics {
  TrackingError errors;
  double omega_ref = 0.0;
  double s_ref = 0.0;
  QpStatus qp_status = QpStatus::kOptimal;
  int qp_iterations = 0;
  double disturbance_norm = 0.0;  ///< norm of the horizon correction vector
  int active_constraints = 0;
  bool fallback = false;
  bool hessian_regularized = false;
};

/// Trajectory-tracking layer. One instance per control loop; owns the
/// disturbance state, the previous command, and the QP workspace.
class MpcController {
 public:
  MpcController(MpcConfig cfg, VehicleParams params,
                std::shared_ptr<const ReferencePath> path);

  /// One control period: project, build and solve the QP, and return the
  /// absolute force command u_prev + delta_u. On an infeasible QP the
  /// previous command is held and the fallback flag is set.
  AxleForceCommand control_step(const VehicleState& state, ControlDiagnostics* diag = nullptr);

  const AxleForceCommand& previous_command() const { return u_prev_; }
  const DisturbanceState& disturbance() const { return dist_; }

  /// When set, every assembled QP is saved to `<dir>/qp_<step>.txt`.
  void set_qp_dump_dir(std::string dir) { qp_dump_dir_ = std::move(dir); }

 private:
  MpcConfig cfg_;
  VehicleParams params_;
  std::shared_ptr<const ReferencePath> path_;
  QpSolver solver_;
  AxleForceCommand u_prev_;
  DisturbanceState dist_;
  double s_hint_ = 0.0;
  LinearModel last_model_;
  Eigen::Vector4d last_error_ = Eigen::Vector4d::Zero();
  bool has_last_ = false;
  Eigen::VectorXd warm_delta_u_;
  std::optional<std::string> qp_dump_dir_;
  long step_index_ = 0;
};

}  // namespace driftsim
