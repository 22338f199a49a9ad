#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "cbfhull/tolerances.h"

namespace cbfhull {

constexpr double kInf = std::numeric_limits<double>::infinity();

// maximize  objective' z
// s.t.      a_ineq z <= b_ineq
//           a_eq z    = b_eq
//           lower <= z <= upper   (entries may be +-inf)
struct LpProblem {
  Eigen::VectorXd objective;
  Eigen::MatrixXd a_ineq;
  Eigen::VectorXd b_ineq;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  // Free variables, zero objective, no rows.
  static LpProblem Free(int num_vars);
  int num_vars() const { return static_cast<int>(objective.size()); }
};

// Accumulates rows before assembling an LpProblem.
class LpBuilder {
 public:
  explicit LpBuilder(int num_vars);

  void SetObjective(const Eigen::VectorXd& c);
  void SetBounds(int var, double lo, double hi);
  void AddLessEqual(const Eigen::RowVectorXd& row, double rhs);
  void AddEqual(const Eigen::RowVectorXd& row, double rhs);
  int num_vars() const { return num_vars_; }
  int num_ineq() const { return static_cast<int>(ineq_rhs_.size()); }

  LpProblem Build() const;

 private:
  int num_vars_;
  Eigen::VectorXd objective_;
  Eigen::VectorXd lower_, upper_;
  std::vector<Eigen::RowVectorXd> ineq_rows_, eq_rows_;
  std::vector<double> ineq_rhs_, eq_rhs_;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

const char* ToString(LpStatus status);

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd z;
  double value = 0.0;
  std::vector<int> active_rows;  // inequality rows tight at z
  int iterations = 0;
};

// Dense two-phase tableau simplex with Bland's anti-cycling rule. Throws
// NumericalFailure if the iteration budget is exhausted.
LpResult SolveLp(const LpProblem& problem, const ToleranceConfig& tol = {});

}  // namespace cbfhull
