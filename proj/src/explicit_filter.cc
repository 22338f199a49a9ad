#include "cbfhull/explicit_filter.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "cbfhull/errors.h"
#include "cbfhull/lp.h"

namespace cbfhull {

std::string ToString(const ActiveSet& s) {
  std::ostringstream os;
  os << "A={";
  for (std::size_t i = 0; i < s.cbf.size(); ++i)
    os << (i ? "," : "") << s.cbf[i] + 1;
  os << "} B={";
  for (std::size_t i = 0; i < s.input.size(); ++i)
    os << (i ? "," : "") << s.input[i] + 1;
  os << "}";
  return os.str();
}

AffineData ExtractAffineData(const StackedMap& map, const Hull& hull,
                             const ToleranceConfig& tol) {
  if (hull.dim() != map.n())
    throw DimensionMismatch("hull dimension differs from the map's n");
  AffineData d;
  d.psi_bar = map.EvalPsi(hull.vertex(0));
  for (const auto& e : map.psi_entries()) {
    if (!e.IsAffine(tol.eig))
      throw Assumption2Violated("a Psi entry is not affine");
  }
  for (int j = 1; j < hull.size(); ++j) {
    const double diff =
        (map.EvalPsi(hull.vertex(j)) - d.psi_bar).cwiseAbs().maxCoeff();
    if (diff > 1e-10) {
      throw Assumption2Violated("Psi differs between vertices 1 and " +
                                std::to_string(j + 1) + " by " +
                                std::to_string(diff));
    }
  }
  d.delta_gain.resize(map.p(), map.n());
  d.delta0.resize(map.p());
  for (int i = 0; i < map.p(); ++i) {
    const QuadFunc& e = map.delta(i);
    if (!e.IsAffine(tol.eig))
      throw Assumption2Violated("delta entry " + std::to_string(i + 1) +
                                " is not affine");
    d.delta_gain.row(i) = e.c().transpose();
    d.delta0(i) = e.d();
  }
  return d;
}

ActiveSetResult ActiveSetAt(const StackedMap& map, const Eigen::VectorXd& x,
                            const InputSet& input_set,
                            const DesiredInput& u_des,
                            const ToleranceConfig& tol) {
  const StackedValue v = map.Eval(x);
  ActiveSetResult r;
  r.solution = SolveQpProjection(u_des(x), v.psi, v.delta, input_set, tol);
  r.set.cbf = r.solution.active_cbf;
  r.set.input = r.solution.active_input;
  return r;
}

namespace {

// Active constraint rows in the c u <= e(x) form, e(x) = e_gain x + e0.
struct ActiveRows {
  Eigen::MatrixXd c;
  Eigen::MatrixXd e_gain;
  Eigen::VectorXd e0;
};

ActiveRows Rows(const AffineData& data, const InputSet& input_set,
                const ActiveSet& active) {
  const int m = static_cast<int>(data.psi_bar.cols());
  const int n = static_cast<int>(data.delta_gain.cols());
  const int k = static_cast<int>(active.cbf.size() + active.input.size());
  ActiveRows a;
  a.c.resize(k, m);
  a.e_gain.setZero(k, n);
  a.e0.resize(k);
  int r = 0;
  for (int i : active.cbf) {
    a.c.row(r) = -data.psi_bar.row(i);
    a.e_gain.row(r) = data.delta_gain.row(i);
    a.e0(r) = data.delta0(i);
    ++r;
  }
  for (int i : active.input) {
    a.c.row(r) = input_set.G().row(i);
    a.e0(r) = input_set.b()(i);
    ++r;
  }
  return a;
}

}  // namespace

AffineLaw KktAffineLaw(const AffineData& data, const InputSet& input_set,
                       const DesiredInput& u_des, const ActiveSet& active,
                       const ToleranceConfig& tol) {
  const int m = static_cast<int>(data.psi_bar.cols());
  const int n = static_cast<int>(data.delta_gain.cols());
  if (u_des.gain.rows() != m || u_des.gain.cols() != n)
    throw DimensionMismatch("KktAffineLaw: u_des gain must be m x n");
  const ActiveRows rows = Rows(data, input_set, active);
  const int k = static_cast<int>(rows.c.rows());
  if (k > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows.c);
    const double smin = k > m ? 0.0 : svd.singularValues()(k - 1);
    if (smin <= tol.licq) {
      throw LicqViolated("active rows " + ToString(active) +
                         " are linearly dependent (smallest singular value " +
                         std::to_string(smin) + ")");
    }
  }
  // K [u; mu] = [u_des(x); e(x)] with K = [[I, C'], [C, 0]].
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + k, m + k);
  kkt.topLeftCorner(m, m).setIdentity();
  kkt.topRightCorner(m, k) = rows.c.transpose();
  kkt.bottomLeftCorner(k, m) = rows.c;
  Eigen::MatrixXd rhs_gain(m + k, n);
  rhs_gain << u_des.gain, rows.e_gain;
  Eigen::VectorXd rhs0(m + k);
  rhs0 << u_des.offset, rows.e0;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible())
    throw LicqViolated("KKT matrix is singular for " + ToString(active));
  const Eigen::MatrixXd gain = lu.solve(rhs_gain);
  const Eigen::VectorXd off = lu.solve(rhs0);

  AffineLaw law;
  law.F = gain.topRows(m);
  law.f = off.head(m);
  const int na = static_cast<int>(active.cbf.size());
  const int nb = k - na;
  law.lambda_gain = gain.middleRows(m, na);
  law.lambda0 = off.segment(m, na);
  law.nu_gain = gain.bottomRows(nb);
  law.nu0 = off.tail(nb);
  return law;
}

namespace {

// Residuals >= 0 of all rows not in the active set, and active multipliers,
// for the law evaluated at x.
struct LawValues {
  Eigen::VectorXd cbf_residual;    // Psi_i u + delta_i, all rows
  Eigen::VectorXd input_residual;  // b_r - G_r u, all rows
  Eigen::VectorXd lambda;          // active CBF multipliers
  Eigen::VectorXd nu;              // active input multipliers
  Eigen::VectorXd u;
};

LawValues Evaluate(const AffineLaw& law, const AffineData& data,
                   const InputSet& input_set, const Eigen::VectorXd& x) {
  LawValues v;
  v.u = law.U(x);
  v.cbf_residual = data.psi_bar * v.u + data.delta_gain * x + data.delta0;
  v.input_residual = input_set.b() - input_set.G() * v.u;
  v.lambda = law.Lambda(x);
  v.nu = law.Nu(x);
  return v;
}

bool Contains(const std::vector<int>& s, int i) {
  return std::find(s.begin(), s.end(), i) != s.end();
}

// Smallest inactive residual; +inf if every row is active.
double InactiveMin(const LawValues& v, const ActiveSet& a) {
  double worst = kInf;
  for (int i = 0; i < v.cbf_residual.size(); ++i)
    if (!Contains(a.cbf, i)) worst = std::min(worst, v.cbf_residual(i));
  for (int i = 0; i < v.input_residual.size(); ++i)
    if (!Contains(a.input, i)) worst = std::min(worst, v.input_residual(i));
  return worst;
}

double MultiplierMin(const LawValues& v) {
  double worst = kInf;
  if (v.lambda.size()) worst = std::min(worst, v.lambda.minCoeff());
  if (v.nu.size()) worst = std::min(worst, v.nu.minCoeff());
  return worst;
}

RegionCheck Failure(int vertex, std::string msg) {
  return RegionCheck{false, vertex, std::move(msg)};
}

}  // namespace

RegionCheck VerifyRegion(const CriticalRegion& region, const AffineData& data,
                         const InputSet& input_set, const DesiredInput& u_des,
                         const ToleranceConfig& tol) {
  if (region.vertices.empty()) return Failure(-1, "region has no vertices");
  const int n = static_cast<int>(data.delta_gain.cols());
  const double closed_tol = 10 * tol.feas;
  Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
  for (std::size_t j = 0; j < region.vertices.size(); ++j) {
    const Eigen::VectorXd& x = region.vertices[j];
    centroid += x;
    const LawValues v = Evaluate(region.law, data, input_set, x);
    const int jj = static_cast<int>(j);
    if (InactiveMin(v, region.active) < -closed_tol)
      return Failure(jj, "an inactive row is violated at a region vertex");
    if (MultiplierMin(v) < -closed_tol)
      return Failure(jj, "an active multiplier is negative at a region vertex");
    const Eigen::VectorXd ud = u_des(x);
    const QpSolution qp =
        SolveQpProjection(ud, data.psi_bar,
                          data.delta_gain * x + data.delta0, input_set, tol);
    const double gap = (qp.u - v.u).cwiseAbs().maxCoeff();
    if (gap > 1e-7) {
      return Failure(jj, "law differs from the online QP by " +
                             std::to_string(gap));
    }
  }
  centroid /= static_cast<double>(region.vertices.size());
  const LawValues v = Evaluate(region.law, data, input_set, centroid);
  if (InactiveMin(v, region.active) <= tol.active)
    return Failure(-1, "an inactive row is not strictly inactive inside");
  if (MultiplierMin(v) <= tol.active)
    return Failure(-1, "strict complementarity fails inside the region");
  const QpSolution qp =
      SolveQpProjection(u_des(centroid), data.psi_bar,
                        data.delta_gain * centroid + data.delta0, input_set,
                        tol);
  if (qp.active_cbf != region.active.cbf ||
      qp.active_input != region.active.input)
    return Failure(-1, "QP active set inside the region differs");
  return {};
}

RegionCheck VerifyStrictRegion(const std::vector<Eigen::VectorXd>& vertices,
                               const StackedMap& map,
                               const InputSet& input_set,
                               const DesiredInput& u_des,
                               const ToleranceConfig& tol) {
  if (vertices.empty()) return Failure(-1, "no vertices");
  std::optional<ActiveSet> common;
  for (std::size_t j = 0; j < vertices.size(); ++j) {
    const int jj = static_cast<int>(j);
    const Eigen::VectorXd& x = vertices[j];
    const StackedValue sv = map.Eval(x);
    const QpSolution qp =
        SolveQpProjection(u_des(x), sv.psi, sv.delta, input_set, tol);
    ActiveSet a{qp.active_cbf, qp.active_input};
    if (!common) {
      common = a;
    } else if (a != *common) {
      return Failure(jj, "active set " + ToString(a) + " differs from " +
                             ToString(*common));
    }
    if (qp.weakly_active)
      return Failure(jj, "a row is tight with a zero multiplier");
    const Eigen::VectorXd cbf_res = sv.psi * qp.u + sv.delta;
    const Eigen::VectorXd in_res = input_set.b() - input_set.G() * qp.u;
    for (int i = 0; i < cbf_res.size(); ++i) {
      if (!Contains(a.cbf, i) && cbf_res(i) <= tol.active)
        return Failure(jj, "CBF row " + std::to_string(i + 1) +
                               " is not strictly inactive");
      if (Contains(a.cbf, i) && qp.lambda(i) <= tol.active)
        return Failure(jj, "CBF row " + std::to_string(i + 1) +
                               " has a zero multiplier");
    }
    for (int i = 0; i < in_res.size(); ++i) {
      if (!Contains(a.input, i) && in_res(i) <= tol.active)
        return Failure(jj, "input row " + std::to_string(i + 1) +
                               " is not strictly inactive");
      if (Contains(a.input, i) && qp.nu(i) <= tol.active)
        return Failure(jj, "input row " + std::to_string(i + 1) +
                               " has a zero multiplier");
    }
  }
  return {};
}

ExplicitController::ExplicitController(std::vector<CriticalRegion> regions,
                                       geometry::Halfspaces hull, int n, int m)
    : regions_(std::move(regions)), hull_(std::move(hull)), n_(n), m_(m) {}

int ExplicitController::Locate(const Eigen::VectorXd& x, double tol) const {
  for (std::size_t r = 0; r < regions_.size(); ++r)
    if (regions_[r].Contains(x, tol)) return static_cast<int>(r);
  return -1;
}

namespace {

// Region polytope for a law; nullopt if it has no interior.
std::optional<CriticalRegion> BuildRegion(const ActiveSet& active,
                                          const AffineLaw& law,
                                          const AffineData& data,
                                          const InputSet& input_set,
                                          const geometry::Halfspaces& hull) {
  const int n = static_cast<int>(data.delta_gain.cols());
  std::vector<Eigen::RowVectorXd> a;
  std::vector<double> b;
  auto add = [&](const Eigen::RowVectorXd& row, double rhs) {
    a.push_back(row);
    b.push_back(rhs);
  };
  for (int i = 0; i < hull.size(); ++i) add(hull.a.row(i), hull.b(i));
  for (int i = 0; i < data.psi_bar.rows(); ++i) {
    if (Contains(active.cbf, i)) continue;
    add(-(data.psi_bar.row(i) * law.F + data.delta_gain.row(i)),
        data.psi_bar.row(i).dot(law.f) + data.delta0(i));
  }
  for (int i = 0; i < input_set.num_rows(); ++i) {
    if (Contains(active.input, i)) continue;
    add(input_set.G().row(i) * law.F,
        input_set.b()(i) - input_set.G().row(i).dot(law.f));
  }
  for (int k = 0; k < law.lambda_gain.rows(); ++k)
    add(-law.lambda_gain.row(k), law.lambda0(k));
  for (int k = 0; k < law.nu_gain.rows(); ++k)
    add(-law.nu_gain.row(k), law.nu0(k));

  geometry::Halfspaces h;
  std::vector<int> keep;
  for (std::size_t r = 0; r < a.size(); ++r) {
    const double norm = a[r].norm();
    if (norm < 1e-12) {
      if (b[r] < -1e-9) return std::nullopt;  // constant, never satisfied
      continue;
    }
    a[r] /= norm;
    b[r] /= norm;
    keep.push_back(static_cast<int>(r));
  }
  h.a.resize(static_cast<Eigen::Index>(keep.size()), n);
  h.b.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    h.a.row(r) = a[keep[r]];
    h.b(r) = b[keep[r]];
  }
  const std::vector<int> irr = geometry::IrredundantRows(h);
  geometry::Halfspaces reduced;
  reduced.a.resize(static_cast<Eigen::Index>(irr.size()), n);
  reduced.b.resize(static_cast<Eigen::Index>(irr.size()));
  for (std::size_t r = 0; r < irr.size(); ++r) {
    reduced.a.row(r) = h.a.row(irr[r]);
    reduced.b(r) = h.b(irr[r]);
  }
  std::vector<Eigen::VectorXd> verts = geometry::EnumerateVertices(reduced);
  if (static_cast<int>(verts.size()) < n + 1 ||
      geometry::AffineRank(verts) < n)
    return std::nullopt;
  return CriticalRegion{active, law, std::move(reduced), std::move(verts)};
}

bool OnHullBoundary(const Eigen::RowVectorXd& a, double b,
                    const geometry::Halfspaces& hull) {
  for (int i = 0; i < hull.size(); ++i) {
    if ((hull.a.row(i) - a).cwiseAbs().maxCoeff() < 1e-9 &&
        std::abs(hull.b(i) - b) < 1e-9)
      return true;
  }
  return false;
}

}  // namespace

ExplicitController PartitionHull(const StackedMap& map, const Hull& hull,
                                 const InputSet& input_set,
                                 const DesiredInput& u_des,
                                 const PartitionOptions& options,
                                 const ToleranceConfig& tol) {
  const AffineData data = ExtractAffineData(map, hull, tol);
  const int n = map.n();
  if (u_des.gain.rows() != map.m() || u_des.gain.cols() != n)
    throw DimensionMismatch("PartitionHull: u_des gain must be m x n");
  const geometry::Halfspaces hull_h = geometry::HullHalfspaces(hull.vertices());
  const auto seeds = geometry::BarycentricGrid(hull, options.seed_per_edge);
  const int ns = static_cast<int>(seeds.size());

  std::vector<ActiveSetResult> solved(ns);
  std::vector<std::string> errors(ns);
#pragma omp parallel for schedule(dynamic) if (options.parallel)
  for (int s = 0; s < ns; ++s) {
    try {
      solved[s] = ActiveSetAt(map, seeds[s].x, input_set, u_des, tol);
    } catch (const std::exception& e) {
      errors[s] = e.what();
    }
  }
  PartitionStats stats;
  stats.seeds = ns;
  std::map<ActiveSet, Eigen::VectorXd> candidates;  // set -> a seed point
  for (int s = 0; s < ns; ++s) {
    if (!errors[s].empty())
      throw UnresolvedRegion("QP failed at a seed point: " + errors[s]);
    if (solved[s].solution.weakly_active) ++stats.weakly_active_seeds;
    candidates.emplace(solved[s].set, seeds[s].x);
  }

  std::vector<CriticalRegion> regions;
  std::map<ActiveSet, bool> built;
  std::vector<ActiveSet> queue;
  for (const auto& [set, x] : candidates) queue.push_back(set);

  auto build = [&](const ActiveSet& set) {
    if (built.count(set)) return;
    built[set] = true;
    AffineLaw law;
    try {
      law = KktAffineLaw(data, input_set, u_des, set, tol);
    } catch (const LicqViolated& e) {
      throw UnresolvedRegion(std::string("seed active set violates LICQ: ") +
                             e.what());
    }
    auto region = BuildRegion(set, law, data, input_set, hull_h);
    if (!region) return;
    const RegionCheck check = VerifyRegion(*region, data, input_set, u_des, tol);
    if (!check.ok) {
      throw UnresolvedRegion("region " + ToString(set) +
                             " failed verification: " + check.message);
    }
    regions.push_back(std::move(*region));
  };

  for (std::size_t i = 0; i < queue.size(); ++i) build(queue[i]);

  // Step across every interior facet; uncovered points reveal missed sets.
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto rows = regions[r].rows;
    const auto verts = regions[r].vertices;
    for (int i = 0; i < rows.size(); ++i) {
      if (OnHullBoundary(rows.a.row(i), rows.b(i), hull_h)) continue;
      Eigen::VectorXd mid = Eigen::VectorXd::Zero(n);
      int count = 0;
      for (const auto& v : verts) {
        if (std::abs(rows.a.row(i).dot(v) - rows.b(i)) < 1e-8) {
          mid += v;
          ++count;
        }
      }
      if (count == 0) continue;
      mid /= count;
      const Eigen::VectorXd probe =
          mid + options.explore_step * rows.a.row(i).transpose();
      if (hull_h.Violation(probe) > 0.0) continue;
      bool covered = false;
      for (const auto& reg : regions)
        if (reg.Contains(probe, 0.0)) covered = true;
      if (covered) continue;
      ++stats.explored_points;
      build(ActiveSetAt(map, probe, input_set, u_des, tol).set);
    }
  }

  for (int s = 0; s < ns; ++s) {
    bool covered = false;
    for (const auto& reg : regions)
      if (reg.Contains(seeds[s].x, 1e-9)) covered = true;
    if (!covered)
      throw UnresolvedRegion("seed point " + std::to_string(s) +
                             " lies in no verified region");
  }
  ExplicitController c(std::move(regions), hull_h, n, map.m());
  c.stats = stats;
  return c;
}

Eigen::VectorXd EvalExplicit(const ExplicitController& controller,
                             const Eigen::VectorXd& x, double tol) {
  if (x.size() != controller.n())
    throw DimensionMismatch("EvalExplicit: state dimension");
  if (controller.hull().Violation(x) > tol) throw OutsideHull("x is outside H");
  const int r = controller.Locate(x, tol);
  if (r < 0) throw NoRegion("no critical region contains x");
  return controller.regions()[r].law.U(x);
}

Eigen::VectorXd InterpolateOnRegion(
    const Eigen::VectorXd& x,
    const std::vector<Eigen::VectorXd>& region_vertices,
    const std::vector<Eigen::VectorXd>& vertex_optima,
    const Eigen::VectorXd& objective, double tol) {
  if (region_vertices.size() != vertex_optima.size() || region_vertices.empty())
    throw DimensionMismatch("InterpolateOnRegion: one optimum per vertex");
  Eigen::VectorXd lambda;
  if (!geometry::BarycentricWeights(x, region_vertices, objective, &lambda, tol))
    throw NotInRegion("x is not in the hull of the region vertices");
  Eigen::VectorXd u = Eigen::VectorXd::Zero(vertex_optima.front().size());
  for (std::size_t j = 0; j < vertex_optima.size(); ++j)
    u += lambda(j) * vertex_optima[j];
  return u;
}

}  // namespace cbfhull
