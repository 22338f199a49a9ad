#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cbfhull/problem_model.h"

namespace cbfhull {

// x' = f(x) + g(x) u with quadratic entries.
class Dynamics {
 public:
  Dynamics(int n, int m, std::vector<QuadFunc> drift, std::vector<QuadFunc> gain);

  static Dynamics Lti(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

  int n() const { return n_; }
  int m() const { return m_; }
  const QuadFunc& drift(int i) const { return drift_[i]; }
  const QuadFunc& gain(int i, int k) const { return gain_[i * m_ + k]; }

  Eigen::VectorXd F(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd G(const Eigen::VectorXd& x) const;
  Eigen::VectorXd operator()(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& u) const {
    return F(x) + G(x) * u;
  }

 private:
  int n_, m_;
  std::vector<QuadFunc> drift_;  // n
  std::vector<QuadFunc> gain_;   // n x m, row-major
};

struct ThreeRoomParams {
  double t_e = -1.0;
  double a = 0.05;
  double b = 0.06;
  double c = 0.08;
  double t_h = 50.0;
};

// x_i' = a(x_{i+1} + x_{i-1} - 2 x_i) + b(t_e - x_i) + c(t_h - x_i) u_i, cyclic.
Dynamics ThreeRoom(const ThreeRoomParams& p = {});

// Stacked CBF data for affine barriers on arbitrary control-affine dynamics:
// Psi_i = a_i' g(x), delta_i = a_i' f(x) + kappa_i (a_i' x + b_i).
StackedMap BuildFromDynamics(const Dynamics& dyn,
                             const std::vector<AffineCbf>& cbfs);

struct ControlAction {
  Eigen::VectorXd u;
  std::string status = "ok";
};

using Controller =
    std::function<ControlAction(double t, const Eigen::VectorXd& x)>;

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> inputs;  // held input on [t_k, t_k + dt)
  std::vector<Eigen::VectorXd> h;       // CBF values at each state
  std::vector<std::string> status;
  bool failed = false;
  int failure_step = -1;
  std::string failure;
};

// Fixed-step RK4, controller sampled once per step (zero-order hold). A
// controller exception stops the run and marks the trajectory failed.
Trajectory Integrate(const Dynamics& dyn, const Controller& controller,
                     const Eigen::VectorXd& x0, double horizon, double dt,
                     const std::vector<AffineCbf>& cbfs = {});

// One RK4 step with input held.
Eigen::VectorXd Rk4Step(const std::function<Eigen::VectorXd(
                            const Eigen::VectorXd&)>& rhs,
                        const Eigen::VectorXd& x, double dt);

std::vector<Trajectory> BatchIntegrate(const Dynamics& dyn,
                                       const Controller& controller,
                                       const std::vector<Eigen::VectorXd>& x0s,
                                       double horizon, double dt,
                                       const std::vector<AffineCbf>& cbfs = {},
                                       bool parallel = true);

// min over t and i of h_i(x(t)). Throws InvalidArgument on an empty run.
double SafetyMargin(const Trajectory& traj, const std::vector<AffineCbf>& cbfs);
double SafetyMargin(const std::vector<Trajectory>& trajs,
                    const std::vector<AffineCbf>& cbfs);

// Uniform samples in the box [lo, hi].
std::vector<Eigen::VectorXd> RandomStates(const Eigen::VectorXd& lo,
                                          const Eigen::VectorXd& hi, int count,
                                          std::uint64_t seed);

// Uniform samples in the hull via Dirichlet weights.
std::vector<Eigen::VectorXd> RandomStates(const Hull& hull, int count,
                                          std::uint64_t seed);

// t, x1..xn, u1..um, h1..hp, status.
std::string TrajectoryCsv(const Trajectory& traj);

}  // namespace cbfhull
