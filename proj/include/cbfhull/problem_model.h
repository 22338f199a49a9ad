#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cbfhull/curvature_class.h"
#include "cbfhull/tolerances.h"

namespace cbfhull {

// Scalar quadratic x'Qx + c'x + d on R^n. No 1/2 factor; Q is stored
// symmetrized.
class QuadFunc {
 public:
  QuadFunc() = default;
  QuadFunc(Eigen::MatrixXd q, Eigen::VectorXd c, double d);

  static QuadFunc Zero(int n);
  static QuadFunc Constant(int n, double d);
  static QuadFunc Affine(Eigen::VectorXd c, double d);

  int dim() const { return static_cast<int>(c_.size()); }
  const Eigen::MatrixXd& Q() const { return q_; }
  const Eigen::VectorXd& c() const { return c_; }
  double d() const { return d_; }

  double operator()(const Eigen::VectorXd& x) const;
  bool IsAffine(double tol) const;
  // Q == 0 and c == 0 within tol.
  bool IsConstant(double tol) const;

  QuadFunc operator+(const QuadFunc& other) const;
  QuadFunc operator-(const QuadFunc& other) const;
  QuadFunc operator*(double s) const;
  QuadFunc operator-() const { return *this * -1.0; }

 private:
  Eigen::MatrixXd q_;
  Eigen::VectorXd c_;
  double d_ = 0.0;
};

struct StackedValue {
  Eigen::MatrixXd psi;    // p x m
  Eigen::VectorXd delta;  // p
};

// Psi: R^n -> R^{p x m}, delta: R^n -> R^p with quadratic entries; row i is
// the CBF inequality Psi_i(x) u + delta_i(x) >= 0.
class StackedMap {
 public:
  StackedMap(int n, int m, int p, std::vector<QuadFunc> psi,
             std::vector<QuadFunc> delta);

  int n() const { return n_; }
  int m() const { return m_; }
  int p() const { return p_; }
  const QuadFunc& psi(int row, int col) const { return psi_[row * m_ + col]; }
  const QuadFunc& delta(int row) const { return delta_[row]; }
  const std::vector<QuadFunc>& psi_entries() const { return psi_; }
  const std::vector<QuadFunc>& delta_entries() const { return delta_; }

  StackedValue Eval(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd EvalPsi(const Eigen::VectorXd& x) const;
  Eigen::VectorXd EvalDelta(const Eigen::VectorXd& x) const;

  // Rows reordered: new row r is old row perm[r].
  StackedMap PermuteRows(const std::vector<int>& perm) const;

 private:
  int n_, m_, p_;
  std::vector<QuadFunc> psi_;
  std::vector<QuadFunc> delta_;
};

inline StackedValue EvalStack(const StackedMap& map, const Eigen::VectorXd& x) {
  return map.Eval(x);
}

// Ordered vertex list; the convex hull is implicit.
class Hull {
 public:
  explicit Hull(std::vector<Eigen::VectorXd> vertices);

  int size() const { return static_cast<int>(vertices_.size()); }
  int dim() const { return static_cast<int>(vertices_.front().size()); }
  const Eigen::VectorXd& vertex(int j) const { return vertices_[j]; }
  const std::vector<Eigen::VectorXd>& vertices() const { return vertices_; }
  Eigen::VectorXd Point(const Eigen::VectorXd& lambda) const;

 private:
  std::vector<Eigen::VectorXd> vertices_;
};

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct Polytope {
  Eigen::MatrixXd g;  // q x m
  Eigen::VectorXd b;
};

// Box and/or polytope; the represented set is their intersection. Construction
// verifies it is nonempty and bounded.
class InputSet {
 public:
  InputSet(std::optional<Box> box, std::optional<Polytope> polytope);
  static InputSet FromBox(Eigen::VectorXd lower, Eigen::VectorXd upper);
  static InputSet FromPolytope(Eigen::MatrixXd g, Eigen::VectorXd b);

  int m() const { return m_; }
  const std::optional<Box>& box() const { return box_; }
  const std::optional<Polytope>& polytope() const { return polytope_; }
  bool is_box() const { return box_.has_value() && !polytope_.has_value(); }

  // Stacked G u <= b: box rows [I; -I] first, then polytope rows.
  const Eigen::MatrixXd& G() const { return g_; }
  const Eigen::VectorXd& b() const { return b_; }
  int num_rows() const { return static_cast<int>(b_.size()); }

  bool Contains(const Eigen::VectorXd& u, double tol) const;

 private:
  int m_ = 0;
  std::optional<Box> box_;
  std::optional<Polytope> polytope_;
  Eigen::MatrixXd g_;
  Eigen::VectorXd b_;
};

// u_des(x) = gain x + offset.
struct DesiredInput {
  Eigen::MatrixXd gain;    // m x n
  Eigen::VectorXd offset;  // m

  static DesiredInput Zero(int n, int m);
  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const {
    return gain * x + offset;
  }
};

// Barycentric weights over hull vertices.
class BaryCoord {
 public:
  explicit BaryCoord(Eigen::VectorXd lambda);
  static BaryCoord Vertex(int num_vertices, int j);
  const Eigen::VectorXd& lambda() const { return lambda_; }

 private:
  Eigen::VectorXd lambda_;
};

// Affine CBF h(x) = a'x + b with alpha(s) = kappa s.
struct AffineCbf {
  Eigen::VectorXd a;
  double b = 0.0;
  double kappa = 1.0;

  double operator()(const Eigen::VectorXd& x) const { return a.dot(x) + b; }
};

// Psi row i = a_i' B, delta_i(x) = a_i' A x + kappa_i (a_i' x + b_i).
StackedMap BuildFromLti(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                        const std::vector<AffineCbf>& cbfs,
                        const InputSet& input_set);

struct AssumptionReport {
  std::vector<CurvatureClass> delta_class;   // per delta entry
  std::vector<bool> delta_concave;           // per delta entry
  std::vector<CurvatureClass> column_class;  // per Psi column
  bool dims_ok = false;  // hull dim == n and input dim == m
  bool a2_ok = false;
  bool a3_ok = false;
};

AssumptionReport ValidateProblem(const StackedMap& map, const Hull& hull,
                                 const InputSet& input_set,
                                 const ToleranceConfig& tol = {});

// Everything a problem file describes.
struct Problem {
  StackedMap map;
  Hull hull;
  InputSet input_set;
  DesiredInput u_des;
  std::optional<std::vector<Eigen::VectorXd>> vertex_inputs;
};

}  // namespace cbfhull
