#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cbfhull/curvature_class.h"
#include "cbfhull/problem_model.h"

namespace cbfhull {

// Global (R^n) curvature of a quadratic: affine if max|Q| <= tol, concave if
// every eigenvalue of Q is <= tol, convex if every eigenvalue >= -tol.
CurvatureClass ClassifyQuadratic(const QuadFunc& q, double tol = 1e-10);

// Aggregate class of Psi(:, k) over its p entries (k is 0-based).
CurvatureClass ColumnCurvature(const StackedMap& map, int k,
                               double tol = 1e-10);

enum class SignSet { kNonneg, kNonpos, kFree };

const char* ToString(SignSet s);

// Sign-aligned cone S(Psi) as a product of per-coordinate sign sets.
struct SignCone {
  std::vector<SignSet> coords;

  bool Contains(const Eigen::VectorXd& u, double tol = 0.0) const;
  // [lo, hi] intersected with S_k.
  std::pair<double, double> Clip(int k, double lo, double hi) const;
};

// Throws A3Violated if some column is indefinite.
SignCone ComputeSignCone(const StackedMap& map, double tol = 1e-10);

enum class ColumnSign { kNonneg, kNonpos, kInconclusive };

const char* ToString(ColumnSign s);

// Certifies Psi(:, k) >= 0 (or <= 0) on the whole hull from vertex values and
// per-entry curvature. Never samples.
ColumnSign UniformColumnSign(const StackedMap& map, const Hull& hull, int k,
                             const ToleranceConfig& tol = {});

// Max Jensen gap sum_j lambda_j phi(x^j) - phi(sum_j lambda_j x^j) of
// phi(x) = Psi(x) u over random vertex subsets and weights. Throws
// ConeViolation if u is not in S(Psi).
double ConcavityWitness(const StackedMap& map, const Eigen::VectorXd& u,
                        const Hull& hull, int trials, std::uint64_t seed = 1,
                        const ToleranceConfig& tol = {});

}  // namespace cbfhull
