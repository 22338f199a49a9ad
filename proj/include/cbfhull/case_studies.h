#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cbfhull/problem_model.h"
#include "cbfhull/sim.h"

namespace cbfhull {

struct CaseStudy {
  std::string name;
  Problem problem;
  std::vector<AffineCbf> cbfs;  // barriers behind the stacked rows, if known
  std::optional<Dynamics> dynamics;
  std::optional<Eigen::VectorXd> reference_witness;  // reported common input
  double horizon = 40.0;
  double dt = 0.01;
  int trajectories = 10;
  std::uint64_t seed = 20240601;
};

// Psi = [-(x-4)^2; 1], delta = [10 - x; -x], U = [0, 10], H = [0, 3].
CaseStudy Example1();
// Three rooms, h_i = x_i - 25, H = [25, 30]^3, U = [0, 1]^3.
CaseStudy Case1();
// Three rooms, 25 <= x_i <= 30.
CaseStudy Case2();
// Damped double integrator, h = 1 +- (x1 + x2), six-vertex hull, U = [-1, 1].
CaseStudy Case3();

// "example1", "case1", "case2" or "case3"; throws InvalidArgument otherwise.
CaseStudy LoadCaseStudy(const std::string& name);

// u_i = 0.05(x_{i+1} + x_{i-1} - 2 x_i) + 0.05(25 - x_i), before clipping.
DesiredInput ThermalNominal();

// Corners of the box, vertex 0 = lower corner, coordinate 1 varying fastest.
std::vector<Eigen::VectorXd> BoxCorners(const Eigen::VectorXd& lo,
                                        const Eigen::VectorXd& hi);

}  // namespace cbfhull
