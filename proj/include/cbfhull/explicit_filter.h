#pragma once

#include <compare>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cbfhull/geometry.h"
#include "cbfhull/problem_model.h"
#include "cbfhull/qp.h"
#include "cbfhull/tolerances.h"

namespace cbfhull {

// Constant Psi and affine delta(x) = delta_gain x + delta0 on the hull.
struct AffineData {
  Eigen::MatrixXd psi_bar;     // p x m
  Eigen::MatrixXd delta_gain;  // p x n
  Eigen::VectorXd delta0;      // p
};

// Throws Assumption2Violated when Psi is not constant on the hull or some
// delta entry is not affine.
AffineData ExtractAffineData(const StackedMap& map, const Hull& hull,
                             const ToleranceConfig& tol = {});

struct ActiveSet {
  std::vector<int> cbf;    // rows of Psi, 0-based
  std::vector<int> input;  // rows of InputSet::G()
  auto operator<=>(const ActiveSet&) const = default;
  bool empty() const { return cbf.empty() && input.empty(); }
};

std::string ToString(const ActiveSet& s);

struct ActiveSetResult {
  ActiveSet set;
  QpSolution solution;
};

// Solves the filter QP at x and reads off the strictly active rows.
ActiveSetResult ActiveSetAt(const StackedMap& map, const Eigen::VectorXd& x,
                            const InputSet& input_set,
                            const DesiredInput& u_des,
                            const ToleranceConfig& tol = {});

// u(x) = F x + f and the multipliers of the active rows, in ActiveSet order.
struct AffineLaw {
  Eigen::MatrixXd F;
  Eigen::VectorXd f;
  Eigen::MatrixXd lambda_gain;  // |A| x n
  Eigen::VectorXd lambda0;
  Eigen::MatrixXd nu_gain;      // |B| x n
  Eigen::VectorXd nu0;

  Eigen::VectorXd U(const Eigen::VectorXd& x) const { return F * x + f; }
  Eigen::VectorXd Lambda(const Eigen::VectorXd& x) const {
    return lambda_gain * x + lambda0;
  }
  Eigen::VectorXd Nu(const Eigen::VectorXd& x) const {
    return nu_gain * x + nu0;
  }
};

// Solves the KKT system once for the given active rows. Throws LicqViolated if
// the active gradients are dependent.
AffineLaw KktAffineLaw(const AffineData& data, const InputSet& input_set,
                       const DesiredInput& u_des, const ActiveSet& active,
                       const ToleranceConfig& tol = {});

struct CriticalRegion {
  ActiveSet active;
  AffineLaw law;
  geometry::Halfspaces rows;  // R x <= s, irredundant, unit normals
  std::vector<Eigen::VectorXd> vertices;

  bool Contains(const Eigen::VectorXd& x, double tol) const {
    return rows.Contains(x, tol);
  }
};

struct RegionCheck {
  bool ok = true;
  int vertex = -1;  // failing vertex, -1 for the interior point
  std::string message;
};

// Closed check used for partition cells: at every region vertex the law is
// primal and dual feasible and agrees with the online QP; at the vertex
// centroid the activity is strict and matches the region's active set.
RegionCheck VerifyRegion(const CriticalRegion& region, const AffineData& data,
                         const InputSet& input_set, const DesiredInput& u_des,
                         const ToleranceConfig& tol = {});

// Strict check: every listed vertex has the same QP active set, strictly
// positive active multipliers and strictly positive inactive residuals. A
// pass makes the whole hull of `vertices` one critical region.
RegionCheck VerifyStrictRegion(const std::vector<Eigen::VectorXd>& vertices,
                               const StackedMap& map,
                               const InputSet& input_set,
                               const DesiredInput& u_des,
                               const ToleranceConfig& tol = {});

struct PartitionOptions {
  int seed_per_edge = 15;
  bool parallel = true;
  double explore_step = 1e-6;
};

struct PartitionStats {
  int seeds = 0;
  int weakly_active_seeds = 0;
  int explored_points = 0;
};

class ExplicitController {
 public:
  ExplicitController(std::vector<CriticalRegion> regions,
                     geometry::Halfspaces hull, int n, int m);

  const std::vector<CriticalRegion>& regions() const { return regions_; }
  const geometry::Halfspaces& hull() const { return hull_; }
  int n() const { return n_; }
  int m() const { return m_; }
  PartitionStats stats;

  // Index of the first region containing x within tol, or -1.
  int Locate(const Eigen::VectorXd& x, double tol = 1e-9) const;

 private:
  std::vector<CriticalRegion> regions_;
  geometry::Halfspaces hull_;
  int n_, m_;
};

ExplicitController PartitionHull(const StackedMap& map, const Hull& hull,
                                 const InputSet& input_set,
                                 const DesiredInput& u_des,
                                 const PartitionOptions& options = {},
                                 const ToleranceConfig& tol = {});

// Throws OutsideHull or NoRegion.
Eigen::VectorXd EvalExplicit(const ExplicitController& controller,
                             const Eigen::VectorXd& x, double tol = 1e-9);

// sum_j lambda_j u*(x^j) for some lambda with sum_j lambda_j x^j = x. Throws
// NotInRegion if x is outside the hull of region_vertices.
Eigen::VectorXd InterpolateOnRegion(
    const Eigen::VectorXd& x, const std::vector<Eigen::VectorXd>& region_vertices,
    const std::vector<Eigen::VectorXd>& vertex_optima,
    const Eigen::VectorXd& objective = {}, double tol = 1e-9);

}  // namespace cbfhull
