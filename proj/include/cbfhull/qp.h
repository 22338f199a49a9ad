#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cbfhull/problem_model.h"
#include "cbfhull/tolerances.h"

namespace cbfhull {

// Solution of  min 1/2 |u - u_des|^2  s.t.  Psi u + delta >= 0,  G u <= b.
// Multipliers satisfy u - u_des - Psi' lambda + G' nu = 0 with lambda, nu >= 0
// and are stored full length (zero on inactive rows).
struct QpSolution {
  Eigen::VectorXd u;
  std::vector<int> active_cbf;    // A, 0-based CBF rows
  std::vector<int> active_input;  // B, 0-based rows of InputSet::G()
  Eigen::VectorXd lambda;         // size p
  Eigen::VectorXd nu;             // size q
  double objective = 0.0;
  bool weakly_active = false;  // some row tight with multiplier below tol
  int iterations = 0;
};

struct QpWarmStart {
  Eigen::VectorXd u;  // used only if feasible at the new data
  std::vector<int> working_set;
};

// Primal active-set method on the projection QP. Throws InfeasibleQP when the
// constraints admit no input.
QpSolution SolveQpProjection(const Eigen::VectorXd& u_des,
                             const Eigen::MatrixXd& psi_x,
                             const Eigen::VectorXd& delta_x,
                             const InputSet& input_set,
                             const ToleranceConfig& tol = {},
                             const QpWarmStart* warm = nullptr);

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;          // worst constraint violation (>= 0)
  double dual = 0.0;            // most negative multiplier magnitude (>= 0)
  double complementarity = 0.0;
  double max() const;
};

KktResiduals ComputeKktResiduals(const QpSolution& sol,
                                 const Eigen::VectorXd& u_des,
                                 const Eigen::MatrixXd& psi_x,
                                 const Eigen::VectorXd& delta_x,
                                 const InputSet& input_set);

// Warm-start working set recovered from a solution.
QpWarmStart WarmStartFrom(const QpSolution& sol, int num_cbf);

}  // namespace cbfhull
