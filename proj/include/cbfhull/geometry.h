#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cbfhull/problem_model.h"

namespace cbfhull::geometry {

// {x : a x <= b}, rows with unit-norm normals.
struct Halfspaces {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;

  int size() const { return static_cast<int>(b.size()); }
  bool Contains(const Eigen::VectorXd& x, double tol) const;
  // Largest violation max_r (a_r x - b_r); <= 0 inside.
  double Violation(const Eigen::VectorXd& x) const;
};

// Dimension of the affine hull of the points.
int AffineRank(const std::vector<Eigen::VectorXd>& points, double tol = 1e-9);

// Facet description of a full-dimensional convex hull. Throws InvalidArgument
// if the points do not span R^n affinely.
Halfspaces HullHalfspaces(const std::vector<Eigen::VectorXd>& points,
                          double tol = 1e-9);

// Pulling triangulation of the hull of the points (any affine dimension). Each
// simplex lists indices into `points`; non-extreme points may be skipped.
std::vector<std::vector<int>> Triangulate(
    const std::vector<Eigen::VectorXd>& points, double tol = 1e-9);

struct HullSample {
  Eigen::VectorXd lambda;  // weights over all hull vertices
  Eigen::VectorXd x;
};

// Barycentric lattice with `per_edge` points per simplex edge on every simplex
// of the triangulation, deduplicated by position. Order is deterministic.
std::vector<HullSample> BarycentricGrid(const Hull& hull, int per_edge);

// Dirichlet(1) weights over all hull vertices.
std::vector<HullSample> RandomHullSamples(const Hull& hull, int count,
                                          std::uint64_t seed);

// Brute-force vertex enumeration of a bounded polytope {a x <= b}.
std::vector<Eigen::VectorXd> EnumerateVertices(const Halfspaces& h,
                                               double tol = 1e-9);

// Indices of rows that are not implied by the others.
std::vector<int> IrredundantRows(const Halfspaces& h, double tol = 1e-9);

// Some lambda >= 0, sum 1, sum_j lambda_j v_j = x maximizing objective'lambda.
// Returns false if x is not in the hull of the vertices.
bool BarycentricWeights(const Eigen::VectorXd& x,
                        const std::vector<Eigen::VectorXd>& vertices,
                        const Eigen::VectorXd& objective,
                        Eigen::VectorXd* lambda, double tol = 1e-9);

}  // namespace cbfhull::geometry
