#include "cbfhull/problem_model.h"

#include <cmath>
#include <string>

#include "cbfhull/curvature.h"
#include "cbfhull/errors.h"
#include "cbfhull/lp.h"

namespace cbfhull {

QuadFunc::QuadFunc(Eigen::MatrixXd q, Eigen::VectorXd c, double d)
    : q_(std::move(q)), c_(std::move(c)), d_(d) {
  if (q_.rows() != c_.size() || q_.cols() != c_.size()) {
    throw DimensionMismatch("QuadFunc: Q must be n x n with n = dim(c)");
  }
  q_ = 0.5 * (q_ + q_.transpose()).eval();
}

QuadFunc QuadFunc::Zero(int n) { return Constant(n, 0.0); }

QuadFunc QuadFunc::Constant(int n, double d) {
  return QuadFunc(Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n), d);
}

QuadFunc QuadFunc::Affine(Eigen::VectorXd c, double d) {
  const auto n = c.size();
  return QuadFunc(Eigen::MatrixXd::Zero(n, n), std::move(c), d);
}

double QuadFunc::operator()(const Eigen::VectorXd& x) const {
  if (x.size() != c_.size()) throw DimensionMismatch("QuadFunc: dim(x) != n");
  return x.dot(q_ * x) + c_.dot(x) + d_;
}

bool QuadFunc::IsAffine(double tol) const {
  return q_.size() == 0 || q_.cwiseAbs().maxCoeff() <= tol;
}

bool QuadFunc::IsConstant(double tol) const {
  return IsAffine(tol) && (c_.size() == 0 || c_.cwiseAbs().maxCoeff() <= tol);
}

QuadFunc QuadFunc::operator+(const QuadFunc& o) const {
  if (o.dim() != dim()) throw DimensionMismatch("QuadFunc sum");
  return QuadFunc(q_ + o.q_, c_ + o.c_, d_ + o.d_);
}

QuadFunc QuadFunc::operator-(const QuadFunc& o) const { return *this + (-o); }

QuadFunc QuadFunc::operator*(double s) const {
  return QuadFunc(q_ * s, c_ * s, d_ * s);
}

StackedMap::StackedMap(int n, int m, int p, std::vector<QuadFunc> psi,
                       std::vector<QuadFunc> delta)
    : n_(n), m_(m), p_(p), psi_(std::move(psi)), delta_(std::move(delta)) {
  if (n < 1 || m < 1 || p < 1) {
    throw InvalidArgument("StackedMap requires n, m, p >= 1");
  }
  if (static_cast<int>(psi_.size()) != p * m ||
      static_cast<int>(delta_.size()) != p) {
    throw DimensionMismatch("StackedMap: psi must be p x m, delta length p");
  }
  for (const auto& q : psi_)
    if (q.dim() != n) throw DimensionMismatch("StackedMap: psi entry dim");
  for (const auto& q : delta_)
    if (q.dim() != n) throw DimensionMismatch("StackedMap: delta entry dim");
}

Eigen::MatrixXd StackedMap::EvalPsi(const Eigen::VectorXd& x) const {
  if (x.size() != n_) throw DimensionMismatch("EvalStack: dim(x) != n");
  Eigen::MatrixXd psi(p_, m_);
  for (int i = 0; i < p_; ++i)
    for (int k = 0; k < m_; ++k) psi(i, k) = this->psi(i, k)(x);
  return psi;
}

Eigen::VectorXd StackedMap::EvalDelta(const Eigen::VectorXd& x) const {
  if (x.size() != n_) throw DimensionMismatch("EvalStack: dim(x) != n");
  Eigen::VectorXd d(p_);
  for (int i = 0; i < p_; ++i) d(i) = delta_[i](x);
  return d;
}

StackedValue StackedMap::Eval(const Eigen::VectorXd& x) const {
  return {EvalPsi(x), EvalDelta(x)};
}

StackedMap StackedMap::PermuteRows(const std::vector<int>& perm) const {
  if (static_cast<int>(perm.size()) != p_)
    throw DimensionMismatch("PermuteRows: permutation length");
  std::vector<QuadFunc> psi;
  std::vector<QuadFunc> delta;
  for (int r = 0; r < p_; ++r) {
    for (int k = 0; k < m_; ++k) psi.push_back(this->psi(perm[r], k));
    delta.push_back(delta_[perm[r]]);
  }
  return StackedMap(n_, m_, p_, std::move(psi), std::move(delta));
}

Hull::Hull(std::vector<Eigen::VectorXd> vertices)
    : vertices_(std::move(vertices)) {
  if (vertices_.empty()) throw InvalidArgument("Hull requires N >= 1 vertices");
  const auto n = vertices_.front().size();
  if (n < 1) throw InvalidArgument("Hull vertices must have dimension >= 1");
  for (std::size_t j = 0; j < vertices_.size(); ++j) {
    if (vertices_[j].size() != n)
      throw DimensionMismatch("Hull: vertex " + std::to_string(j) + " dim");
    for (std::size_t i = 0; i < j; ++i) {
      if ((vertices_[i] - vertices_[j]).cwiseAbs().maxCoeff() <= 1e-12) {
        throw InvalidArgument("Hull: vertices " + std::to_string(i) + " and " +
                              std::to_string(j) + " coincide");
      }
    }
  }
}

Eigen::VectorXd Hull::Point(const Eigen::VectorXd& lambda) const {
  if (lambda.size() != size()) throw DimensionMismatch("Hull::Point weights");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim());
  for (int j = 0; j < size(); ++j) x += lambda(j) * vertices_[j];
  return x;
}

InputSet::InputSet(std::optional<Box> box, std::optional<Polytope> polytope)
    : box_(std::move(box)), polytope_(std::move(polytope)) {
  if (!box_ && !polytope_)
    throw InvalidArgument("InputSet requires a box or a polytope");
  if (box_) {
    if (box_->lower.size() != box_->upper.size())
      throw DimensionMismatch("InputSet box bounds");
    m_ = static_cast<int>(box_->lower.size());
    for (int k = 0; k < m_; ++k) {
      if (!(box_->lower(k) <= box_->upper(k)))
        throw InvalidArgument("InputSet box: u_min > u_max at coordinate " +
                              std::to_string(k));
    }
  }
  if (polytope_) {
    const int pm = static_cast<int>(polytope_->g.cols());
    if (box_ && pm != m_) throw DimensionMismatch("InputSet polytope columns");
    if (polytope_->g.rows() != polytope_->b.size())
      throw DimensionMismatch("InputSet polytope rows");
    m_ = pm;
  }
  if (m_ < 1) throw InvalidArgument("InputSet dimension must be >= 1");

  const int box_rows = box_ ? 2 * m_ : 0;
  const int poly_rows = polytope_ ? static_cast<int>(polytope_->b.size()) : 0;
  g_.resize(box_rows + poly_rows, m_);
  b_.resize(box_rows + poly_rows);
  if (box_) {
    g_.topRows(m_) = Eigen::MatrixXd::Identity(m_, m_);
    g_.middleRows(m_, m_) = -Eigen::MatrixXd::Identity(m_, m_);
    b_.head(m_) = box_->upper;
    b_.segment(m_, m_) = -box_->lower;
  }
  if (polytope_) {
    g_.bottomRows(poly_rows) = polytope_->g;
    b_.tail(poly_rows) = polytope_->b;
  }

  // Nonempty and bounded: maximize +-u_k over the set.
  LpBuilder lp(m_);
  for (int r = 0; r < g_.rows(); ++r) lp.AddLessEqual(g_.row(r), b_(r));
  for (int k = 0; k < m_; ++k) {
    for (double s : {1.0, -1.0}) {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(m_);
      c(k) = s;
      lp.SetObjective(c);
      const LpResult r = SolveLp(lp.Build());
      if (r.status == LpStatus::kInfeasible)
        throw InvalidArgument("InputSet is empty");
      if (r.status == LpStatus::kUnbounded)
        throw InvalidArgument("InputSet is unbounded in coordinate " +
                              std::to_string(k));
    }
  }
}

InputSet InputSet::FromBox(Eigen::VectorXd lower, Eigen::VectorXd upper) {
  return InputSet(Box{std::move(lower), std::move(upper)}, std::nullopt);
}

InputSet InputSet::FromPolytope(Eigen::MatrixXd g, Eigen::VectorXd b) {
  return InputSet(std::nullopt, Polytope{std::move(g), std::move(b)});
}

bool InputSet::Contains(const Eigen::VectorXd& u, double tol) const {
  if (u.size() != m_) throw DimensionMismatch("InputSet::Contains");
  return ((g_ * u - b_).array() <= tol).all();
}

DesiredInput DesiredInput::Zero(int n, int m) {
  return {Eigen::MatrixXd::Zero(m, n), Eigen::VectorXd::Zero(m)};
}

BaryCoord::BaryCoord(Eigen::VectorXd lambda) : lambda_(std::move(lambda)) {
  if (lambda_.size() < 1) throw InvalidArgument("BaryCoord: empty weights");
  if (lambda_.minCoeff() < -1e-10)
    throw InvalidArgument("BaryCoord: negative weight");
  if (std::abs(lambda_.sum() - 1.0) > 1e-10)
    throw InvalidArgument("BaryCoord: weights do not sum to one");
}

BaryCoord BaryCoord::Vertex(int num_vertices, int j) {
  Eigen::VectorXd l = Eigen::VectorXd::Zero(num_vertices);
  l(j) = 1.0;
  return BaryCoord(l);
}

StackedMap BuildFromLti(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                        const std::vector<AffineCbf>& cbfs,
                        const InputSet& input_set) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(b.cols());
  if (a.cols() != n || b.rows() != n)
    throw DimensionMismatch("BuildFromLti: A must be n x n, B n x m");
  if (input_set.m() != m)
    throw DimensionMismatch("BuildFromLti: input set dimension != m");
  if (cbfs.empty()) throw InvalidArgument("BuildFromLti: no CBF rows");
  std::vector<QuadFunc> psi, delta;
  for (std::size_t i = 0; i < cbfs.size(); ++i) {
    const auto& h = cbfs[i];
    if (h.a.size() != n)
      throw DimensionMismatch("BuildFromLti: cbf " + std::to_string(i) +
                              " gradient dim");
    if (!(h.kappa >= 0.0))
      throw InvalidArgument("BuildFromLti: negative kappa in cbf " +
                            std::to_string(i));
    const Eigen::RowVectorXd row = h.a.transpose() * b;
    for (int k = 0; k < m; ++k) psi.push_back(QuadFunc::Constant(n, row(k)));
    delta.push_back(
        QuadFunc::Affine(a.transpose() * h.a + h.kappa * h.a, h.kappa * h.b));
  }
  return StackedMap(n, m, static_cast<int>(cbfs.size()), std::move(psi),
                    std::move(delta));
}

AssumptionReport ValidateProblem(const StackedMap& map, const Hull& hull,
                                 const InputSet& input_set,
                                 const ToleranceConfig& tol) {
  AssumptionReport report;
  report.dims_ok = hull.dim() == map.n() && input_set.m() == map.m();
  report.a2_ok = true;
  for (int i = 0; i < map.p(); ++i) {
    const CurvatureClass c = ClassifyQuadratic(map.delta(i), tol.eig);
    report.delta_class.push_back(c);
    report.delta_concave.push_back(IsConcaveOrAffine(c));
    report.a2_ok = report.a2_ok && IsConcaveOrAffine(c);
  }
  report.a3_ok = true;
  for (int k = 0; k < map.m(); ++k) {
    const CurvatureClass c = ColumnCurvature(map, k, tol.eig);
    report.column_class.push_back(c);
    report.a3_ok = report.a3_ok && c != CurvatureClass::kIndefinite;
  }
  return report;
}

}  // namespace cbfhull
