#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>

namespace driftsim {

/// Dense convex QP: minimize 0.5 x'Hx + f'x subject to
/// A_ieq x <= b_ieq and lower <= x <= upper. Bounds may be +/-infinity.
struct QpProblem {
  Eigen::MatrixXd h;
  Eigen::VectorXd f;
  Eigen::MatrixXd a_ieq;  // may have zero rows
  Eigen::VectorXd b_ieq;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int num_vars() const { return static_cast<int>(f.size()); }
  int num_ieq() const { return static_cast<int>(b_ieq.size()); }
};

enum class QpStatus { kOptimal, kMaxIterations, kInfeasible };

struct QpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  QpStatus status = QpStatus::kInfeasible;
  int iterations = 0;
  /// Multipliers for the stacked rows [a_ieq; upper bounds; lower bounds],
  /// nonnegative at an optimum.
  Eigen::VectorXd lambda;
  bool hessian_regularized = false;
};

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
};

/// Primal active-set solver. One instance owns scratch storage for a control
/// loop; instances are independent.
class QpSolver {
 public:
  struct Options {
    double tol = 1e-8;
    int max_iter = 200;
  };

  QpSolver() = default;
  explicit QpSolver(const Options& opts) : opts_(opts) {}

  Options& options() { return opts_; }
  const Options& options() const { return opts_; }

  /// Solve from a cold start (x = 0 clamped into the box).
  QpSolution solve(const QpProblem& p) const;

  /// Solve warm-started from x0 (clamped into the box; a phase-1 subproblem
  /// recovers feasibility with respect to the inequality rows if needed).
  QpSolution solve(const QpProblem& p, const Eigen::VectorXd& x0) const;

 private:
  QpSolution solve_impl(const QpProblem& p, Eigen::VectorXd x0, bool allow_phase1) const;
  Options opts_;
};

/// Infinity norms of the four KKT residual groups for a returned solution.
KktResiduals kkt_residuals(const QpProblem& p, const QpSolution& sol);

/// Plain-text round-trip of a problem for offline reproduction.
/// Format: a header line, then each block as a labelled matrix with one row
/// per line, entries printed with 17 significant digits.
std::string dump_qp(const QpProblem& p);
QpProblem load_qp(const std::string& text);
void save_qp_file(const QpProblem& p, const std::string& path);
QpProblem load_qp_file(const std::string& path);

}  // namespace driftsim
