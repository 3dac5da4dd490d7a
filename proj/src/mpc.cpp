#include "driftsim/mpc.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

namespace driftsim {

namespace {

Eigen::Vector4d to_vec(const AxleForceCommand& u) {
  return {u.fxf, u.fxr, u.fyf, u.fyr};
}
}  // namespace

void validate(const MpcConfig& cfg) {
  if (cfg.nc < 1 || cfg.nc > cfg.np) {
    throw std::invalid_argument("mpc: control horizon must satisfy 1 <= nc <= np");
  }
  if (cfg.sample_time <= 0.0) {
    throw std::invalid_argument("mpc: sample time must be positive");
  }
  if (cfg.gamma <= 0.0 || cfg.gamma > 1.0) {
    throw std::invalid_argument("mpc: gamma must lie in (0, 1]");
  }
  Eigen::LLT<Eigen::Matrix4d> r_llt(cfg.r);
  if (r_llt.info() != Eigen::Success) {
    throw std::invalid_argument("mpc: R must be positive definite");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> q_eig(cfg.q);
  if (q_eig.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, cfg.q.norm())) {
    throw std::invalid_argument("mpc: Q must be positive semi-definite");
  }
  if (cfg.dfx_max <= 0.0 || cfg.dfy_max <= 0.0) {
    throw std::invalid_argument("mpc: force rate limits must be positive");
  }
  if (cfg.filter_cutoff_hz <= 0.0) {
    throw std::invalid_argument("mpc: filter cutoff must be positive");
  }
  if (cfg.qp_tol <= 0.0 || cfg.qp_max_iter < 1) {
    throw std::invalid_argument("mpc: invalid QP solver settings");
  }
  if (cfg.yaw_gains.k1 < 0.0 || cfg.yaw_gains.k2 < 0.0) {
    throw std::invalid_argument("mpc: yaw-rate feedback gains must be nonnegative");
  }
}

AugmentedModel augment(const LinearModel& model) {
  AugmentedModel aug;
  aug.a_bar.setZero();
  aug.a_bar.topLeftCorner<4, 4>() = model.a_d;
  aug.a_bar.topRightCorner<4, 4>() = model.b_d;
  aug.a_bar.bottomRightCorner<4, 4>().setIdentity();
  aug.b_bar.setZero();
  aug.b_bar.topRows<4>() = model.b_d;
  aug.b_bar.bottomRows<4>().setIdentity();
  aug.c_out.setZero();
  aug.c_out.leftCols<4>().setIdentity();
  return aug;
}

PredictionMatrices build_prediction(const AugmentedModel& aug, int np, int nc) {
  if (nc < 1 || nc > np) {
    throw std::invalid_argument("build_prediction: need 1 <= nc <= np");
  }
  PredictionMatrices pred;
  pred.psi.resize(4 * np, 8);
  pred.theta = Eigen::MatrixXd::Zero(4 * np, 4 * nc);

  // c_power = C * A_bar^i, built incrementally.
  Eigen::Matrix<double, 4, 8> c_power = aug.c_out;
  std::vector<Eigen::Matrix<double, 4, 4>> impulse(np);  // C * A_bar^i * B_bar
  for (int i = 0; i < np; ++i) {
    impulse[i] = c_power * aug.b_bar;
    c_power = c_power * aug.a_bar;
    pred.psi.middleRows<4>(4 * i) = c_power;
  }
  for (int i = 0; i < np; ++i) {
    for (int j = 0; j <= std::min(i, nc - 1); ++j) {
      pred.theta.block<4, 4>(4 * i, 4 * j) = impulse[i - j];
    }
  }
  return pred;
}

IneqConstraints octagon_constraints(double mu, const AxleLoads& loads,
                                    const AxleForceCommand& u_prev, int np, int nc) {
  if (loads.f_zf <= 0.0 || loads.f_zr <= 0.0) {
    throw std::invalid_argument("octagon_constraints: axle loads must be positive");
  }
  const double inset = std::cos(M_PI / 8.0);
  // (longitudinal index, lateral index, radius) per axle in u ordering.
  const struct {
    int ix, iy;
    double cap;
  } axles[2] = {{0, 2, mu * loads.f_zf * inset}, {1, 3, mu * loads.f_zr * inset}};

  IneqConstraints c;
  c.a = Eigen::MatrixXd::Zero(16 * np, 4 * nc);
  c.b.resize(16 * np);

  int row = 0;
  for (int i = 1; i <= np; ++i) {
    const int blocks = std::min(i, nc);  // increments accumulated by step i
    for (const auto& ax : axles) {
      for (int j = 0; j < 8; ++j) {
        const double cj = std::cos(j * M_PI / 4.0);
        const double sj = std::sin(j * M_PI / 4.0);
        for (int l = 0; l < blocks; ++l) {
          c.a(row, 4 * l + ax.ix) = cj;
          c.a(row, 4 * l + ax.iy) = sj;
        }
        const Eigen::Vector4d u0 = to_vec(u_prev);
        c.b(row) = ax.cap - (cj * u0(ax.ix) + sj * u0(ax.iy));
        ++row;
      }
    }
  }
  return c;
}

DisturbanceState estimate_disturbance(const Eigen::Vector4d& x_measured_next,
                                      const Eigen::Vector4d& x_k, const Eigen::Vector4d& u_k,
                                      const LinearModel& model, const DisturbanceState& prev,
                                      const MpcConfig& cfg) {
  DisturbanceState next;
  next.d_raw = x_measured_next - (model.a_d * x_k + model.b_d * u_k);
  const double alpha = 1.0 - std::exp(-2.0 * M_PI * cfg.filter_cutoff_hz * cfg.sample_time);
  next.d_filt = prev.d_filt + alpha * (next.d_raw - prev.d_filt);
  return next;
}

Eigen::VectorXd correction_vector(const Eigen::Vector4d& d_filt, const AugmentedModel& aug,
                                  int np, double gamma) {
  if (gamma <= 0.0 || gamma > 1.0) {
    throw std::invalid_argument("correction_vector: gamma must lie in (0, 1]");
  }
  Eigen::VectorXd corr(4 * np);
  // The disturbance enters the error partition of the augmented state; its
  // propagation to the output reduces to powers of the error-state block.
  Eigen::Matrix<double, 8, 1> d_bar = Eigen::Matrix<double, 8, 1>::Zero();
  d_bar.head<4>() = d_filt;
  Eigen::Matrix<double, 8, 1> power = d_bar;   // A_bar^j * d_bar
  Eigen::Matrix<double, 8, 1> accum = d_bar;   // sum_{j<i} A_bar^j * d_bar
  double scale = gamma;
  for (int i = 0; i < np; ++i) {
    corr.segment<4>(4 * i) = scale * (aug.c_out * accum);
    power = aug.a_bar * power;
    accum += power;
    scale *= gamma;
  }
  return corr;
}

QpProblem build_qp(const Eigen::Matrix<double, 8, 1>& x_bar, const PredictionMatrices& pred,
                   const Eigen::VectorXd& y_ref, const Eigen::VectorXd* d_corr,
                   const MpcConfig& cfg, const IneqConstraints& constraints) {
  const int np = static_cast<int>(pred.psi.rows()) / 4;
  const int nc = static_cast<int>(pred.theta.cols()) / 4;
  if (y_ref.size() != 4 * np) {
    throw std::invalid_argument("build_qp: reference length mismatch");
  }

  Eigen::VectorXd free_response = pred.psi * x_bar;
  if (d_corr != nullptr) {
    if (d_corr->size() != 4 * np) {
      throw std::invalid_argument("build_qp: correction length mismatch");
    }
    free_response += *d_corr;
  }
  free_response -= y_ref;

  // Block-diagonal weights applied without materializing them.
  Eigen::MatrixXd q_theta(4 * np, 4 * nc);
  Eigen::VectorXd q_free(4 * np);
  for (int i = 0; i < np; ++i) {
    q_theta.middleRows<4>(4 * i) = cfg.q * pred.theta.middleRows<4>(4 * i);
    q_free.segment<4>(4 * i) = cfg.q * free_response.segment<4>(4 * i);
  }

  QpProblem qp;
  qp.h = 2.0 * (pred.theta.transpose() * q_theta);
  for (int j = 0; j < nc; ++j) {
    qp.h.block<4, 4>(4 * j, 4 * j) += 2.0 * cfg.r;
  }
  qp.f = 2.0 * (pred.theta.transpose() * q_free);

  const double dx = cfg.dfx_max * cfg.sample_time;
  const double dy = cfg.dfy_max * cfg.sample_time;
  qp.lower.resize(4 * nc);
  qp.upper.resize(4 * nc);
  for (int j = 0; j < nc; ++j) {
    qp.lower.segment<4>(4 * j) = Eigen::Vector4d{-dx, -dx, -dy, -dy};
    qp.upper.segment<4>(4 * j) = Eigen::Vector4d{dx, dx, dy, dy};
  }

  qp.a_ieq = constraints.a;
  qp.b_ieq = constraints.b;
  return qp;
}

MpcController::MpcController(MpcConfig cfg, VehicleParams params,
                             std::shared_ptr<const ReferencePath> path)
    : cfg_(cfg), params_(params), path_(std::move(path)) {
  validate(cfg_);
  validate(params_);
  if (!path_) {
    throw std::invalid_argument("MpcController: path must not be null");
  }
  solver_.options().tol = cfg_.qp_tol;
  solver_.options().max_iter = cfg_.qp_max_iter;
  warm_delta_u_ = Eigen::VectorXd::Zero(4 * cfg_.nc);
}

AxleForceCommand MpcController::control_step(const VehicleState& state,
                                             ControlDiagnostics* diag) {
  if (state.v <= 0.0) {
    throw std::invalid_argument("control_step: v must be positive");
  }

  const ReferencePoint ref = project({state.x_pos, state.y_pos}, *path_, s_hint_);
  s_hint_ = ref.s;

  const double e_d = lateral_offset({state.x_pos, state.y_pos}, ref);
  const double e_phi = wrap_angle(state.phi - ref.heading + state.beta);
  const double omega_ref = desired_yaw_rate(e_d, e_phi, ref, cfg_.yaw_gains);
  const TrackingError err = tracking_errors(state, ref, omega_ref);
  const Eigen::Vector4d x_err = err.vec();

  if (cfg_.compensation_enabled && has_last_) {
    dist_ = estimate_disturbance(x_err, last_error_, to_vec(u_prev_), last_model_, dist_, cfg_);
  }

  const LinearModel model = linearize(ref, state.beta, state.v, params_, cfg_.sample_time,
                                      cfg_.couple_yaw_rate_error);
  const AugmentedModel aug = augment(model);
  const PredictionMatrices pred = build_prediction(aug, cfg_.np, cfg_.nc);
  const IneqConstraints octagon =
      octagon_constraints(params_.mu, static_axle_loads(params_), u_prev_, cfg_.np, cfg_.nc);

  Eigen::Matrix<double, 8, 1> x_bar;
  x_bar.head<4>() = x_err;
  x_bar.tail<4>() = to_vec(u_prev_);

  Eigen::VectorXd d_corr;
  const Eigen::VectorXd* d_corr_ptr = nullptr;
  if (cfg_.compensation_enabled) {
    d_corr = correction_vector(dist_.d_filt, aug, cfg_.np, cfg_.gamma);
    d_corr_ptr = &d_corr;
  }

  const Eigen::VectorXd y_ref = Eigen::VectorXd::Zero(4 * cfg_.np);
  const QpProblem qp = build_qp(x_bar, pred, y_ref, d_corr_ptr, cfg_, octagon);

  if (qp_dump_dir_) {
    save_qp_file(qp, *qp_dump_dir_ + "/qp_" + std::to_string(step_index_) + ".txt");
  }

  // Warm start: previous increment sequence shifted by one block.
  Eigen::VectorXd warm = Eigen::VectorXd::Zero(4 * cfg_.nc);
  if (cfg_.nc > 1) {
    warm.head(4 * (cfg_.nc - 1)) = warm_delta_u_.tail(4 * (cfg_.nc - 1));
  }
  const QpSolution sol = solver_.solve(qp, warm);

  AxleForceCommand u = u_prev_;
  bool fallback = false;
  if (sol.status == QpStatus::kInfeasible) {
    fallback = true;
    warm_delta_u_.setZero();
  } else {
    u.fxf += sol.x(0);
    u.fxr += sol.x(1);
    u.fyf += sol.x(2);
    u.fyr += sol.x(3);
    warm_delta_u_ = sol.x;
  }

  if (diag != nullptr) {
    diag->errors = err;
    diag->omega_ref = omega_ref;
    diag->s_ref = ref.s;
    diag->qp_status = sol.status;
    diag->qp_iterations = sol.iterations;
    diag->disturbance_norm = d_corr_ptr != nullptr ? d_corr.norm() : 0.0;
    diag->active_constraints =
        static_cast<int>((sol.lambda.array() > cfg_.qp_tol).count());
    diag->fallback = fallback;
    diag->hessian_regularized = sol.hessian_regularized;
  }

  last_model_ = model;
  last_error_ = x_err;
  has_last_ = true;
  u_prev_ = u;
  ++step_index_;
  return u;
}

}  // namespace driftsim
