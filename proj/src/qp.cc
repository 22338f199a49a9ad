#include "cbfhull/qp.h"

#include <algorithm>
#include <cmath>

#include "cbfhull/errors.h"
#include "cbfhull/lp.h"

namespace cbfhull {
namespace {

// Constraints c_r u <= e_r: CBF rows as -Psi_i u <= delta_i, then G u <= b.
struct Constraints {
  Eigen::MatrixXd c;
  Eigen::VectorXd e;
  int num_cbf = 0;
};

Constraints Stack(const Eigen::MatrixXd& psi, const Eigen::VectorXd& delta,
                  const InputSet& input_set) {
  Constraints s;
  s.num_cbf = static_cast<int>(psi.rows());
  const int q = input_set.num_rows();
  const int m = static_cast<int>(psi.cols());
  s.c.resize(s.num_cbf + q, m);
  s.e.resize(s.num_cbf + q);
  s.c.topRows(s.num_cbf) = -psi;
  s.e.head(s.num_cbf) = delta;
  s.c.bottomRows(q) = input_set.G();
  s.e.tail(q) = input_set.b();
  return s;
}

// Maximum uniform normalized slack; returns the point or throws.
Eigen::VectorXd FeasiblePoint(const Constraints& s, const ToleranceConfig& tol) {
  const int m = static_cast<int>(s.c.cols());
  LpBuilder lp(m + 1);
  Eigen::VectorXd obj = Eigen::VectorXd::Zero(m + 1);
  obj(m) = 1.0;
  lp.SetObjective(obj);
  lp.SetBounds(m, -kInf, 1.0);
  double worst_zero_row = kInf;
  for (int r = 0; r < s.c.rows(); ++r) {
    const double norm = s.c.row(r).norm();
    if (norm <= 1e-14) {
      worst_zero_row = std::min(worst_zero_row, s.e(r));
      continue;
    }
    Eigen::RowVectorXd row(m + 1);
    row.head(m) = s.c.row(r) / norm;
    row(m) = 1.0;
    lp.AddLessEqual(row, s.e(r) / norm);
  }
  if (worst_zero_row < -tol.feas) {
    throw InfeasibleQP("a constraint row with zero input gain is violated",
                       worst_zero_row);
  }
  const LpResult r = SolveLp(lp.Build(), tol);
  if (r.status != LpStatus::kOptimal)
    throw NumericalFailure("QP phase-one LP did not solve");
  const double margin = r.z(m);
  if (margin < -tol.feas) {
    throw InfeasibleQP("CBF and input constraints are incompatible (margin " +
                           std::to_string(margin) + ")",
                       margin);
  }
  return r.z.head(m);
}

bool Feasible(const Constraints& s, const Eigen::VectorXd& u, double tol) {
  return ((s.c * u - s.e).array() <= tol).all();
}

}  // namespace

double KktResiduals::max() const {
  return std::max({stationarity, primal, dual, complementarity});
}

QpSolution SolveQpProjection(const Eigen::VectorXd& u_des,
                             const Eigen::MatrixXd& psi_x,
                             const Eigen::VectorXd& delta_x,
                             const InputSet& input_set,
                             const ToleranceConfig& tol,
                             const QpWarmStart* warm) {
  const int m = static_cast<int>(u_des.size());
  if (psi_x.cols() != m || input_set.m() != m ||
      psi_x.rows() != delta_x.size()) {
    throw DimensionMismatch("SolveQpProjection: inconsistent dimensions");
  }
  const Constraints s = Stack(psi_x, delta_x, input_set);
  const int rows = static_cast<int>(s.e.size());

  Eigen::VectorXd u;
  std::vector<int> working;
  if (warm != nullptr && warm->u.size() == m && Feasible(s, warm->u, tol.feas)) {
    u = warm->u;
    for (int r : warm->working_set) {
      if (r < 0 || r >= rows) continue;
      if (std::abs(s.c.row(r) * u - s.e(r)) > tol.feas) continue;
      // Keep the working set linearly independent.
      Eigen::MatrixXd cw(working.size() + 1, m);
      for (std::size_t i = 0; i < working.size(); ++i)
        cw.row(i) = s.c.row(working[i]);
      cw.row(working.size()) = s.c.row(r);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(cw);
      lu.setThreshold(1e-10);
      if (lu.rank() == static_cast<int>(working.size()) + 1)
        working.push_back(r);
    }
  } else {
    u = FeasiblePoint(s, tol);
  }

  QpSolution sol;
  Eigen::VectorXd mu;
  const int budget = 100 * (rows + m + 1);
  for (int it = 0;; ++it) {
    if (it > budget) throw NumericalFailure("QP active-set budget exhausted");
    sol.iterations = it;
    const int k = static_cast<int>(working.size());
    Eigen::MatrixXd cw(k, m);
    for (int i = 0; i < k; ++i) cw.row(i) = s.c.row(working[i]);
    const Eigen::VectorXd g = u_des - u;
    // Identity Hessian: step is the projection of g onto null(C_W).
    mu = Eigen::VectorXd::Zero(k);
    if (k > 0) {
      mu = (cw * cw.transpose()).ldlt().solve(cw * g);
    }
    const Eigen::VectorXd step = g - cw.transpose() * mu;
    if (step.norm() <= 1e-12 * (1.0 + u.norm())) {
      if (k == 0) break;
      Eigen::Index worst;
      const double min_mu = mu.minCoeff(&worst);
      if (min_mu >= -1e-12) break;
      working.erase(working.begin() + worst);
      continue;
    }
    double alpha = 1.0;
    int blocking = -1;
    for (int r = 0; r < rows; ++r) {
      if (std::find(working.begin(), working.end(), r) != working.end())
        continue;
      const double cp = s.c.row(r).dot(step);
      if (cp <= 1e-12 * (1.0 + s.c.row(r).norm())) continue;
      const double a = std::max(0.0, (s.e(r) - s.c.row(r).dot(u)) / cp);
      if (a < alpha) {
        alpha = a;
        blocking = r;
      }
    }
    u += alpha * step;
    if (blocking >= 0) working.push_back(blocking);
  }

  const int p = s.num_cbf;
  const int q = rows - p;
  sol.u = u;
  sol.lambda = Eigen::VectorXd::Zero(p);
  sol.nu = Eigen::VectorXd::Zero(q);
  for (std::size_t i = 0; i < working.size(); ++i) {
    const int r = working[i];
    const double val = std::max(0.0, mu(i));
    if (r < p) {
      sol.lambda(r) = val;
    } else {
      sol.nu(r - p) = val;
    }
  }
  // Weakly active rows (tight with negligible multiplier) count as inactive.
  for (int r = 0; r < rows; ++r) {
    const double mult = r < p ? sol.lambda(r) : sol.nu(r - p);
    const double resid = s.e(r) - s.c.row(r).dot(u);
    if (mult > tol.active) {
      if (r < p) {
        sol.active_cbf.push_back(r);
      } else {
        sol.active_input.push_back(r - p);
      }
    } else if (resid <= tol.active) {
      sol.weakly_active = true;
    }
  }
  sol.objective = 0.5 * (u - u_des).squaredNorm();
  return sol;
}

KktResiduals ComputeKktResiduals(const QpSolution& sol,
                                 const Eigen::VectorXd& u_des,
                                 const Eigen::MatrixXd& psi_x,
                                 const Eigen::VectorXd& delta_x,
                                 const InputSet& input_set) {
  KktResiduals r;
  const Eigen::VectorXd stat = sol.u - u_des - psi_x.transpose() * sol.lambda +
                               input_set.G().transpose() * sol.nu;
  r.stationarity = stat.cwiseAbs().maxCoeff();
  const Eigen::VectorXd cbf = psi_x * sol.u + delta_x;
  const Eigen::VectorXd inp = input_set.b() - input_set.G() * sol.u;
  r.primal = std::max({0.0, -cbf.minCoeff(), -inp.minCoeff()});
  r.dual = std::max({0.0, -sol.lambda.minCoeff(),
                     sol.nu.size() ? -sol.nu.minCoeff() : 0.0});
  r.complementarity =
      std::max(sol.lambda.cwiseProduct(cbf).cwiseAbs().maxCoeff(),
               sol.nu.size() ? sol.nu.cwiseProduct(inp).cwiseAbs().maxCoeff()
                             : 0.0);
  return r;
}

QpWarmStart WarmStartFrom(const QpSolution& sol, int num_cbf) {
  QpWarmStart w;
  w.u = sol.u;
  for (int i : sol.active_cbf) w.working_set.push_back(i);
  for (int l : sol.active_input) w.working_set.push_back(num_cbf + l);
  return w;
}

}  // namespace cbfhull
