#include "cbfhull/curvature.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "cbfhull/errors.h"

namespace cbfhull {

CurvatureClass ClassifyQuadratic(const QuadFunc& q, double tol) {
  if (q.IsAffine(tol)) return CurvatureClass::kAffine;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q.Q(),
                                                     Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  if (ev.maxCoeff() <= tol) return CurvatureClass::kConcave;
  if (ev.minCoeff() >= -tol) return CurvatureClass::kConvex;
  return CurvatureClass::kIndefinite;
}

CurvatureClass ColumnCurvature(const StackedMap& map, int k, double tol) {
  if (k < 0 || k >= map.m()) throw InvalidArgument("ColumnCurvature: bad k");
  bool all_affine = true, concave = true, convex = true;
  for (int i = 0; i < map.p(); ++i) {
    const CurvatureClass c = ClassifyQuadratic(map.psi(i, k), tol);
    all_affine = all_affine && c == CurvatureClass::kAffine;
    concave = concave && IsConcaveOrAffine(c);
    convex = convex && IsConvexOrAffine(c);
  }
  if (all_affine) return CurvatureClass::kAffine;
  if (concave) return CurvatureClass::kConcave;
  if (convex) return CurvatureClass::kConvex;
  return CurvatureClass::kIndefinite;
}

const char* ToString(SignSet s) {
  switch (s) {
    case SignSet::kNonneg:
      return "[0,inf)";
    case SignSet::kNonpos:
      return "(-inf,0]";
    case SignSet::kFree:
      return "R";
  }
  return "?";
}

bool SignCone::Contains(const Eigen::VectorXd& u, double tol) const {
  if (u.size() != static_cast<Eigen::Index>(coords.size()))
    throw DimensionMismatch("SignCone::Contains");
  for (std::size_t k = 0; k < coords.size(); ++k) {
    if (coords[k] == SignSet::kNonneg && u(k) < -tol) return false;
    if (coords[k] == SignSet::kNonpos && u(k) > tol) return false;
  }
  return true;
}

std::pair<double, double> SignCone::Clip(int k, double lo, double hi) const {
  if (coords[k] == SignSet::kNonneg) lo = std::max(lo, 0.0);
  if (coords[k] == SignSet::kNonpos) hi = std::min(hi, 0.0);
  return {lo, hi};
}

SignCone ComputeSignCone(const StackedMap& map, double tol) {
  SignCone cone;
  for (int k = 0; k < map.m(); ++k) {
    switch (ColumnCurvature(map, k, tol)) {
      case CurvatureClass::kAffine:
        cone.coords.push_back(SignSet::kFree);
        break;
      case CurvatureClass::kConcave:
        cone.coords.push_back(SignSet::kNonneg);
        break;
      case CurvatureClass::kConvex:
        cone.coords.push_back(SignSet::kNonpos);
        break;
      case CurvatureClass::kIndefinite:
        throw A3Violated(k);
    }
  }
  return cone;
}

const char* ToString(ColumnSign s) {
  switch (s) {
    case ColumnSign::kNonneg:
      return "nonneg";
    case ColumnSign::kNonpos:
      return "nonpos";
    case ColumnSign::kInconclusive:
      return "inconclusive";
  }
  return "?";
}

ColumnSign UniformColumnSign(const StackedMap& map, const Hull& hull, int k,
                             const ToleranceConfig& tol) {
  if (ColumnCurvature(map, k, tol.eig) == CurvatureClass::kIndefinite)
    throw A3Violated(k);
  // A concave entry nonnegative at the vertices is nonnegative on the hull; a
  // convex entry nonpositive at the vertices is nonpositive on the hull.
  bool nonneg = true, nonpos = true;
  for (int i = 0; i < map.p(); ++i) {
    const QuadFunc& e = map.psi(i, k);
    const CurvatureClass c = ClassifyQuadratic(e, tol.eig);
    bool ge = IsConcaveOrAffine(c), le = IsConvexOrAffine(c);
    for (const auto& v : hull.vertices()) {
      const double val = e(v);
      ge = ge && val >= -tol.sign;
      le = le && val <= tol.sign;
    }
    nonneg = nonneg && ge;
    nonpos = nonpos && le;
  }
  if (nonneg) return ColumnSign::kNonneg;
  if (nonpos) return ColumnSign::kNonpos;
  return ColumnSign::kInconclusive;
}

double ConcavityWitness(const StackedMap& map, const Eigen::VectorXd& u,
                        const Hull& hull, int trials, std::uint64_t seed,
                        const ToleranceConfig& tol) {
  const SignCone cone = ComputeSignCone(map, tol.eig);
  if (!cone.Contains(u)) throw ConeViolation("u is not in S(Psi)");
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  const int n_vert = hull.size();
  double worst = -std::numeric_limits<double>::infinity();
  std::vector<int> order(n_vert);
  for (int t = 0; t < trials; ++t) {
    // Random subset size in [1, N], random members, Dirichlet(1) weights.
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const int size = std::uniform_int_distribution<int>(1, n_vert)(rng);
    Eigen::VectorXd w(size);
    for (int s = 0; s < size; ++s) w(s) = expo(rng);
    w /= w.sum();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(hull.dim());
    for (int s = 0; s < size; ++s) x += w(s) * hull.vertex(order[s]);
    const Eigen::VectorXd phi_x = map.EvalPsi(x) * u;
    Eigen::VectorXd gap = Eigen::VectorXd::Zero(map.p());
    for (int s = 0; s < size; ++s)
      gap += w(s) * (map.EvalPsi(hull.vertex(order[s])) * u - phi_x);
    worst = std::max(worst, gap.maxCoeff());
  }
  return worst;
}

}  // namespace cbfhull
