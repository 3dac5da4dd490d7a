#include "driftsim/qp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace driftsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Stacked row view of all inequalities: a_ieq rows, then upper bounds as
// e_i x <= ub_i, then lower bounds as -e_i x <= -lb_i. Rows with infinite
// right-hand side are inert.
struct RowSet {
  const QpProblem& p;
  int m_ieq;
  int n;

  explicit RowSet(const QpProblem& prob)
      : p(prob), m_ieq(prob.num_ieq()), n(prob.num_vars()) {}

  int count() const { return m_ieq + 2 * n; }

  double rhs(int r) const {
    if (r < m_ieq) return p.b_ieq(r);
    if (r < m_ieq + n) return p.upper(r - m_ieq);
    return -p.lower(r - m_ieq - n);
  }

  double dot(int r, const Eigen::VectorXd& x) const {
    if (r < m_ieq) return p.a_ieq.row(r).dot(x);
    if (r < m_ieq + n) return x(r - m_ieq);
    return -x(r - m_ieq - n);
  }

  void append_row(int r, Eigen::MatrixXd& g, int row) const {
    if (r < m_ieq) {
      g.row(row) = p.a_ieq.row(r);
    } else if (r < m_ieq + n) {
      g.row(row).setZero();
      g(row, r - m_ieq) = 1.0;
    } else {
      g.row(row).setZero();
      g(row, r - m_ieq - n) = -1.0;
    }
  }
};

void check_problem(const QpProblem& p) {
  const int n = p.num_vars();
  if (p.h.rows() != n || p.h.cols() != n) {
    throw std::invalid_argument("qp: H dimensions inconsistent with f");
  }
  if (p.lower.size() != n || p.upper.size() != n) {
    throw std::invalid_argument("qp: bound dimensions inconsistent with f");
  }
  if (p.a_ieq.rows() != p.b_ieq.size() || (p.a_ieq.rows() > 0 && p.a_ieq.cols() != n)) {
    throw std::invalid_argument("qp: inequality dimensions inconsistent");
  }
  for (int i = 0; i < n; ++i) {
    if (p.lower(i) > p.upper(i)) {
      throw std::invalid_argument("qp: lower bound exceeds upper bound");
    }
  }
  const double scale = std::max(1.0, p.h.cwiseAbs().maxCoeff());
  if ((p.h - p.h.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw std::invalid_argument("qp: H must be symmetric");
  }
}

double max_row_violation(const RowSet& rows, const Eigen::VectorXd& x) {
  double worst = 0.0;
  for (int r = 0; r < rows.count(); ++r) {
    const double rhs = rows.rhs(r);
    if (!std::isfinite(rhs)) continue;
    worst = std::max(worst, rows.dot(r, x) - rhs);
  }
  return worst;
}

}  // namespace

QpSolution QpSolver::solve(const QpProblem& p) const {
  check_problem(p);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(p.num_vars());
  return solve_impl(p, std::move(x0), true);
}

QpSolution QpSolver::solve(const QpProblem& p, const Eigen::VectorXd& x0) const {
  check_problem(p);
  if (x0.size() != p.num_vars()) {
    throw std::invalid_argument("qp: warm start dimension mismatch");
  }
  return solve_impl(p, x0, true);
}

QpSolution QpSolver::solve_impl(const QpProblem& p, Eigen::VectorXd x, bool allow_phase1) const {
  const int n = p.num_vars();
  const RowSet rows(p);
  const double tol = opts_.tol;

  QpSolution sol;
  sol.lambda = Eigen::VectorXd::Zero(rows.count());

  // Box feasibility is free; clamp the start point.
  for (int i = 0; i < n; ++i) x(i) = std::clamp(x(i), p.lower(i), p.upper(i));

  const double b_scale = p.b_ieq.size() > 0 ? p.b_ieq.cwiseAbs().maxCoeff() : 0.0;
  const double feas_tol = tol * (1.0 + b_scale);
  if (max_row_violation(rows, x) > feas_tol) {
    if (!allow_phase1) {
      sol.status = QpStatus::kInfeasible;
      sol.x = x;
      return sol;
    }
    // Phase 1: relax the general rows with slacks s >= 0, minimize ||s||^2
    // plus a small pull toward the requested start.
    const int m = rows.m_ieq;
    QpProblem ph;
    ph.h = Eigen::MatrixXd::Zero(n + m, n + m);
    const double eps = 1e-8;
    ph.h.topLeftCorner(n, n) = eps * Eigen::MatrixXd::Identity(n, n);
    ph.h.bottomRightCorner(m, m) = Eigen::MatrixXd::Identity(m, m);
    ph.f = Eigen::VectorXd::Zero(n + m);
    ph.f.head(n) = -eps * x;
    ph.a_ieq = Eigen::MatrixXd::Zero(m, n + m);
    ph.a_ieq.leftCols(n) = p.a_ieq;
    ph.a_ieq.rightCols(m) = -Eigen::MatrixXd::Identity(m, m);
    ph.b_ieq = p.b_ieq;
    ph.lower = Eigen::VectorXd::Constant(n + m, 0.0);
    ph.lower.head(n) = p.lower;
    ph.upper = Eigen::VectorXd::Constant(n + m, kInf);
    ph.upper.head(n) = p.upper;

    Eigen::VectorXd z0(n + m);
    z0.head(n) = x;
    for (int r = 0; r < m; ++r) {
      z0(n + r) = std::max(0.0, p.a_ieq.row(r).dot(x) - p.b_ieq(r));
    }
    const QpSolution ph_sol = solve_impl(ph, std::move(z0), false);
    x = ph_sol.x.head(n);
    if (ph_sol.x.tail(m).maxCoeff() > feas_tol || max_row_violation(rows, x) > feas_tol) {
      sol.status = QpStatus::kInfeasible;
      sol.x = x;
      return sol;
    }
  }

  // Factor H, regularizing if it is only semidefinite.
  Eigen::MatrixXd h_sym = 0.5 * (p.h + p.h.transpose());
  Eigen::LLT<Eigen::MatrixXd> h_llt(h_sym);
  if (h_llt.info() != Eigen::Success) {
    const double ridge = 1e-8 * h_sym.trace() / n;
    h_sym += std::max(ridge, 1e-14) * Eigen::MatrixXd::Identity(n, n);
    h_llt.compute(h_sym);
    sol.hessian_regularized = true;
    if (h_llt.info() != Eigen::Success) {
      throw std::invalid_argument("qp: H is not positive definite even after regularization");
    }
  }

  std::vector<int> working;  // row indices of the active working set
  working.reserve(n);

  Eigen::VectorXd g(n), p_step(n), lam_w;
  Eigen::MatrixXd gw, y;

  int it = 0;
  for (; it < opts_.max_iter; ++it) {
    g = h_sym * x + p.f;

    const int w = static_cast<int>(working.size());
    bool drop_candidate = false;
    int drop_index = -1;

    if (w == 0) {
      p_step = -h_llt.solve(g);
    } else {
      gw.resize(w, n);
      for (int i = 0; i < w; ++i) rows.append_row(working[i], gw, i);
      y = h_llt.solve(gw.transpose());            // n x w
      Eigen::MatrixXd s = gw * y;                 // w x w, SPD for independent rows
      Eigen::LLT<Eigen::MatrixXd> s_llt(s);
      if (s_llt.info() != Eigen::Success) {
        // Dependent working set; retry with a tiny ridge, then drop the
        // weakest row if that still fails.
        s += 1e-12 * std::max(1.0, s.trace() / w) * Eigen::MatrixXd::Identity(w, w);
        s_llt.compute(s);
        if (s_llt.info() != Eigen::Success) {
          working.pop_back();
          continue;
        }
      }
      lam_w = s_llt.solve(-(gw * h_llt.solve(g)));
      p_step = -h_llt.solve(g + gw.transpose() * lam_w);

      // Stationary on the working set: check multiplier signs.
      if (p_step.lpNorm<Eigen::Infinity>() <= tol * (1.0 + x.lpNorm<Eigen::Infinity>())) {
        double most_negative = -tol;
        for (int i = 0; i < w; ++i) {
          if (lam_w(i) < most_negative) {
            most_negative = lam_w(i);
            drop_index = i;
          }
        }
        if (drop_index < 0) {
          for (int i = 0; i < w; ++i) sol.lambda(working[i]) = std::max(lam_w(i), 0.0);
          sol.status = QpStatus::kOptimal;
          break;
        }
        drop_candidate = true;
      }
    }

    if (drop_candidate) {
      working.erase(working.begin() + drop_index);
      continue;
    }

    if (w == 0 && p_step.lpNorm<Eigen::Infinity>() <= tol * (1.0 + x.lpNorm<Eigen::Infinity>())) {
      sol.status = QpStatus::kOptimal;
      break;
    }

    // Ratio test against the inactive rows.
    double alpha = 1.0;
    int blocking = -1;
    for (int r = 0; r < rows.count(); ++r) {
      if (std::find(working.begin(), working.end(), r) != working.end()) continue;
      const double rhs = rows.rhs(r);
      if (!std::isfinite(rhs)) continue;
      const double d = rows.dot(r, p_step);
      if (d <= 1e-14 * (1.0 + std::abs(rhs))) continue;
      const double slack = rhs - rows.dot(r, x);
      const double a = std::max(slack, 0.0) / d;
      if (a < alpha) {
        alpha = a;
        blocking = r;
      }
    }

    x += alpha * p_step;
    if (blocking >= 0 && static_cast<int>(working.size()) < n) {
      working.push_back(blocking);
    }
  }

  if (sol.status != QpStatus::kOptimal) {
    sol.status = QpStatus::kMaxIterations;
    // Best feasible iterate so far is the current x; report the last
    // multiplier estimate for diagnostics.
    const int w = static_cast<int>(working.size());
    if (w > 0 && lam_w.size() == w) {
      for (int i = 0; i < w; ++i) sol.lambda(working[i]) = std::max(lam_w(i), 0.0);
    }
  }

  sol.x = x;
  sol.iterations = it;
  sol.objective = 0.5 * x.dot(h_sym * x) + p.f.dot(x);
  return sol;
}

KktResiduals kkt_residuals(const QpProblem& p, const QpSolution& sol) {
  const RowSet rows(p);
  const Eigen::VectorXd& x = sol.x;

  Eigen::VectorXd grad = 0.5 * (p.h + p.h.transpose()) * x + p.f;
  KktResiduals res;
  for (int r = 0; r < rows.count(); ++r) {
    const double rhs = rows.rhs(r);
    if (!std::isfinite(rhs)) continue;
    const double lam = sol.lambda.size() > r ? sol.lambda(r) : 0.0;
    const double slack = rows.dot(r, x) - rhs;
    res.primal = std::max(res.primal, slack);
    res.dual = std::max(res.dual, -lam);
    res.complementarity = std::max(res.complementarity, std::abs(lam * slack));
    if (lam != 0.0) {
      if (r < rows.m_ieq) {
        grad += lam * p.a_ieq.row(r).transpose();
      } else if (r < rows.m_ieq + rows.n) {
        grad(r - rows.m_ieq) += lam;
      } else {
        grad(r - rows.m_ieq - rows.n) -= lam;
      }
    }
  }
  res.primal = std::max(res.primal, 0.0);
  res.dual = std::max(res.dual, 0.0);
  res.stationarity = grad.lpNorm<Eigen::Infinity>();
  return res;
}

namespace {

void print_matrix(std::ostringstream& out, const char* name, const Eigen::MatrixXd& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out << buf << (j + 1 == m.cols() ? "" : " ");
    }
    out << '\n';
  }
}

Eigen::MatrixXd parse_matrix(std::istringstream& in, const std::string& expect) {
  std::string name;
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> name >> rows >> cols) || name != expect) {
    throw std::runtime_error("qp load: expected block '" + expect + "'");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(in >> m(i, j))) {
        throw std::runtime_error("qp load: truncated block '" + expect + "'");
      }
    }
  }
  return m;
}

}  // namespace

std::string dump_qp(const QpProblem& p) {
  std::ostringstream out;
  out << "driftsim-qp 1\n";
  print_matrix(out, "H", p.h);
  print_matrix(out, "f", p.f);
  print_matrix(out, "A_ieq", p.a_ieq);
  print_matrix(out, "b_ieq", p.b_ieq);
  print_matrix(out, "lower", p.lower);
  print_matrix(out, "upper", p.upper);
  return out.str();
}

QpProblem load_qp(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "driftsim-qp" || version != 1) {
    throw std::runtime_error("qp load: not a driftsim-qp v1 dump");
  }
  QpProblem p;
  p.h = parse_matrix(in, "H");
  p.f = parse_matrix(in, "f");
  p.a_ieq = parse_matrix(in, "A_ieq");
  p.b_ieq = parse_matrix(in, "b_ieq");
  p.lower = parse_matrix(in, "lower");
  p.upper = parse_matrix(in, "upper");
  check_problem(p);
  return p;
}

void save_qp_file(const QpProblem& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("qp dump: cannot open " + path);
  out << dump_qp(p);
  if (!out) throw std::runtime_error("qp dump: write failed for " + path);
}

QpProblem load_qp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("qp load: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_qp(ss.str());
}

}  // namespace driftsim
