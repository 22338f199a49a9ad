#include "cbfhull/lp.h"

#include <algorithm>
#include <cmath>

#include "cbfhull/errors.h"

namespace cbfhull {

LpProblem LpProblem::Free(int num_vars) {
  LpProblem p;
  p.objective = Eigen::VectorXd::Zero(num_vars);
  p.a_ineq.resize(0, num_vars);
  p.b_ineq.resize(0);
  p.a_eq.resize(0, num_vars);
  p.b_eq.resize(0);
  p.lower = Eigen::VectorXd::Constant(num_vars, -kInf);
  p.upper = Eigen::VectorXd::Constant(num_vars, kInf);
  return p;
}

LpBuilder::LpBuilder(int num_vars)
    : num_vars_(num_vars),
      objective_(Eigen::VectorXd::Zero(num_vars)),
      lower_(Eigen::VectorXd::Constant(num_vars, -kInf)),
      upper_(Eigen::VectorXd::Constant(num_vars, kInf)) {}

void LpBuilder::SetObjective(const Eigen::VectorXd& c) {
  if (c.size() != num_vars_) throw DimensionMismatch("LP objective size");
  objective_ = c;
}

void LpBuilder::SetBounds(int var, double lo, double hi) {
  lower_(var) = lo;
  upper_(var) = hi;
}

void LpBuilder::AddLessEqual(const Eigen::RowVectorXd& row, double rhs) {
  if (row.size() != num_vars_) throw DimensionMismatch("LP row size");
  ineq_rows_.push_back(row);
  ineq_rhs_.push_back(rhs);
}

void LpBuilder::AddEqual(const Eigen::RowVectorXd& row, double rhs) {
  if (row.size() != num_vars_) throw DimensionMismatch("LP row size");
  eq_rows_.push_back(row);
  eq_rhs_.push_back(rhs);
}

LpProblem LpBuilder::Build() const {
  LpProblem p;
  p.objective = objective_;
  p.lower = lower_;
  p.upper = upper_;
  const int mi = static_cast<int>(ineq_rows_.size());
  const int me = static_cast<int>(eq_rows_.size());
  p.a_ineq.resize(mi, num_vars_);
  p.b_ineq.resize(mi);
  for (int i = 0; i < mi; ++i) {
    p.a_ineq.row(i) = ineq_rows_[i];
    p.b_ineq(i) = ineq_rhs_[i];
  }
  p.a_eq.resize(me, num_vars_);
  p.b_eq.resize(me);
  for (int i = 0; i < me; ++i) {
    p.a_eq.row(i) = eq_rows_[i];
    p.b_eq(i) = eq_rhs_[i];
  }
  return p;
}

const char* ToString(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
  }
  return "unknown";
}

namespace {

// z = shift + Σ_k sign_k * y_{col_k} with y >= 0.
struct VarMap {
  double shift = 0.0;
  std::vector<std::pair<int, double>> terms;
};

class Tableau {
 public:
  Tableau(int rows, int cols)
      : t_(Eigen::MatrixXd::Zero(rows + 1, cols + 1)),
        basis_(rows, -1),
        rows_(rows),
        cols_(cols) {}

  double& at(int r, int c) { return t_(r, c); }
  double rhs(int r) const { return t_(r, cols_); }
  double& rhs_ref(int r) { return t_(r, cols_); }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::vector<int>& basis() { return basis_; }

  // Objective row holds reduced costs c_B B^-1 A_j - c_j for maximization.
  void PriceOut(const Eigen::VectorXd& cost) {
    t_.row(rows_).setZero();
    for (int j = 0; j < cols_; ++j) t_(rows_, j) = -cost(j);
    for (int r = 0; r < rows_; ++r) {
      const double cb = cost(basis_[r]);
      if (cb != 0.0) t_.row(rows_) += cb * t_.row(r);
    }
  }

  double objective_value() const { return t_(rows_, cols_); }

  void Pivot(int r, int c) {
    const double p = t_(r, c);
    t_.row(r) /= p;
    for (int i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = c;
  }

  // Returns false on unboundedness.
  bool Run(const std::vector<bool>& allowed, const ToleranceConfig& tol,
           int* iterations) {
    const int budget = 50000 + 100 * (rows_ + cols_);
    const double rc_tol = 1e-11;
    const double pivot_tol = std::max(tol.pivot, 1e-11);
    while (true) {
      if (++(*iterations) > budget) {
        throw NumericalFailure("simplex iteration budget exhausted");
      }
      // Bland: smallest eligible entering index.
      int enter = -1;
      for (int j = 0; j < cols_; ++j) {
        if (allowed[j] && t_(rows_, j) < -rc_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = kInf;
      for (int r = 0; r < rows_; ++r) {
        const double a = t_(r, enter);
        if (a <= pivot_tol) continue;
        const double ratio = rhs(r) / a;
        if (ratio < best - 1e-14 ||
            (std::abs(ratio - best) <= 1e-14 && leave >= 0 &&
             basis_[r] < basis_[leave])) {
          best = ratio;
          leave = r;
        }
      }
      if (leave < 0) return false;
      Pivot(leave, enter);
    }
  }

  void DropRow(int r) {
    // Swap with the last constraint row, keep objective row last.
    const int last = rows_ - 1;
    if (r != last) {
      t_.row(r).swap(t_.row(last));
      std::swap(basis_[r], basis_[last]);
    }
    t_.row(last).swap(t_.row(rows_));
    Eigen::MatrixXd shrunk = t_.topRows(rows_);
    t_ = shrunk;
    basis_.pop_back();
    --rows_;
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
  int rows_;
  int cols_;
};

}  // namespace

LpResult SolveLp(const LpProblem& prob, const ToleranceConfig& tol) {
  const int n = prob.num_vars();
  if (prob.a_ineq.cols() != n && prob.a_ineq.rows() > 0)
    throw DimensionMismatch("LP inequality matrix columns");
  if (prob.a_eq.cols() != n && prob.a_eq.rows() > 0)
    throw DimensionMismatch("LP equality matrix columns");
  if (prob.lower.size() != n || prob.upper.size() != n)
    throw DimensionMismatch("LP bound sizes");

  LpResult result;
  for (int j = 0; j < n; ++j) {
    if (prob.lower(j) > prob.upper(j)) {
      result.status = LpStatus::kInfeasible;
      return result;
    }
  }

  // Substitute bounded/free variables by nonnegative ones.
  std::vector<VarMap> map(n);
  int ny = 0;
  std::vector<std::pair<int, double>> range_rows;  // (y col, width)
  for (int j = 0; j < n; ++j) {
    const double lo = prob.lower(j), hi = prob.upper(j);
    if (std::isfinite(lo)) {
      map[j].shift = lo;
      map[j].terms.push_back({ny, 1.0});
      if (std::isfinite(hi)) range_rows.push_back({ny, hi - lo});
      ++ny;
    } else if (std::isfinite(hi)) {
      map[j].shift = hi;
      map[j].terms.push_back({ny++, -1.0});
    } else {
      map[j].terms.push_back({ny++, 1.0});
      map[j].terms.push_back({ny++, -1.0});
    }
  }

  Eigen::VectorXd shift(n);
  for (int j = 0; j < n; ++j) shift(j) = map[j].shift;
  auto transform_row = [&](const Eigen::RowVectorXd& row) {
    Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(ny);
    for (int j = 0; j < n; ++j)
      for (auto [col, s] : map[j].terms) out(col) += s * row(j);
    return out;
  };

  const int mi = static_cast<int>(prob.a_ineq.rows());
  const int me = static_cast<int>(prob.a_eq.rows());
  const int mr = static_cast<int>(range_rows.size());
  const int num_leq = mi + mr;
  const int rows = num_leq + me;

  std::vector<Eigen::RowVectorXd> rrows;
  std::vector<double> rrhs;
  rrows.reserve(rows);
  for (int i = 0; i < mi; ++i) {
    rrows.push_back(transform_row(prob.a_ineq.row(i)));
    rrhs.push_back(prob.b_ineq(i) - prob.a_ineq.row(i).dot(shift));
  }
  for (auto [col, width] : range_rows) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(ny);
    r(col) = 1.0;
    rrows.push_back(r);
    rrhs.push_back(width);
  }
  for (int i = 0; i < me; ++i) {
    rrows.push_back(transform_row(prob.a_eq.row(i)));
    rrhs.push_back(prob.b_eq(i) - prob.a_eq.row(i).dot(shift));
  }

  // Columns: y | slacks (one per <= row) | artificials.
  std::vector<int> art_row;
  for (int i = 0; i < rows; ++i) {
    const bool leq = i < num_leq;
    if (!leq || rrhs[i] < 0.0) art_row.push_back(i);
  }
  const int slack0 = ny;
  const int art0 = ny + num_leq;
  const int cols = art0 + static_cast<int>(art_row.size());
  Tableau tab(rows, cols);
  {
    int a = 0;
    for (int i = 0; i < rows; ++i) {
      const bool leq = i < num_leq;
      const double sign = rrhs[i] < 0.0 ? -1.0 : 1.0;
      for (int c = 0; c < ny; ++c) tab.at(i, c) = sign * rrows[i](c);
      if (leq) tab.at(i, slack0 + i) = sign;
      tab.rhs_ref(i) = sign * rrhs[i];
      if (!leq || rrhs[i] < 0.0) {
        tab.at(i, art0 + a) = 1.0;
        tab.basis()[i] = art0 + a;
        ++a;
      } else {
        tab.basis()[i] = slack0 + i;
      }
    }
  }

  double scale = 1.0;
  for (double v : rrhs) scale = std::max(scale, std::abs(v));

  std::vector<bool> allowed(cols, true);
  if (!art_row.empty()) {
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols);
    for (int c = art0; c < cols; ++c) cost(c) = -1.0;
    tab.PriceOut(cost);
    tab.Run(allowed, tol, &result.iterations);
    if (tab.objective_value() < -1e-9 * scale) {
      result.status = LpStatus::kInfeasible;
      return result;
    }
    // Drive remaining artificials out of the basis.
    for (int r = tab.rows() - 1; r >= 0; --r) {
      if (tab.basis()[r] < art0) continue;
      int col = -1;
      double best = 1e-9;
      for (int c = 0; c < art0; ++c) {
        if (std::abs(tab.at(r, c)) > best) {
          best = std::abs(tab.at(r, c));
          col = c;
        }
      }
      if (col >= 0) {
        tab.Pivot(r, col);
      } else {
        tab.DropRow(r);  // redundant equality
      }
    }
    for (int c = art0; c < cols; ++c) allowed[c] = false;
  }

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols);
  for (int j = 0; j < n; ++j)
    for (auto [col, s] : map[j].terms) cost(col) += s * prob.objective(j);
  tab.PriceOut(cost);
  if (!tab.Run(allowed, tol, &result.iterations)) {
    result.status = LpStatus::kUnbounded;
    return result;
  }

  Eigen::VectorXd y = Eigen::VectorXd::Zero(cols);
  for (int r = 0; r < tab.rows(); ++r) y(tab.basis()[r]) = tab.rhs(r);
  result.z = shift;
  for (int j = 0; j < n; ++j)
    for (auto [col, s] : map[j].terms) result.z(j) += s * y(col);
  // Clamp roundoff onto finite bounds.
  for (int j = 0; j < n; ++j)
    result.z(j) = std::clamp(result.z(j), prob.lower(j), prob.upper(j));
  result.value = prob.objective.dot(result.z);
  result.status = LpStatus::kOptimal;
  for (int i = 0; i < mi; ++i) {
    const double slack = prob.b_ineq(i) - prob.a_ineq.row(i).dot(result.z);
    if (slack <= 1e-9 * (1.0 + std::abs(prob.b_ineq(i)))) {
      result.active_rows.push_back(i);
    }
  }
  return result;
}

}  // namespace cbfhull
