#include "cbfhull/geometry.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "cbfhull/errors.h"
#include "cbfhull/lp.h"

namespace cbfhull::geometry {
namespace {

// Calls fn on each k-subset of {0..n-1} in lexicographic order.
template <typename Fn>
void ForEachSubset(int n, int k, Fn&& fn) {
  if (k > n || k < 0) return;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Orthonormal basis (columns) of the affine span directions of the points.
Eigen::MatrixXd AffineBasis(const std::vector<Eigen::VectorXd>& pts,
                            double tol) {
  const int n = static_cast<int>(pts.front().size());
  if (pts.size() < 2) return Eigen::MatrixXd(n, 0);
  Eigen::MatrixXd diff(n, pts.size() - 1);
  for (std::size_t j = 1; j < pts.size(); ++j)
    diff.col(j - 1) = pts[j] - pts[0];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(diff, Eigen::ComputeFullU);
  const Eigen::VectorXd& s = svd.singularValues();
  const double scale = std::max(1.0, s.size() ? s(0) : 0.0);
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol * scale) ++rank;
  return svd.matrixU().leftCols(rank);
}

struct Facet {
  Eigen::VectorXd normal;
  double offset;
  std::vector<int> members;  // points on the facet
};

// Facets of a full-dimensional point set in R^d (d >= 1).
std::vector<Facet> Facets(const std::vector<Eigen::VectorXd>& pts,
                          double tol) {
  const int d = static_cast<int>(pts.front().size());
  const int n = static_cast<int>(pts.size());
  double scale = 1.0;
  for (const auto& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double eps = tol * scale;
  std::vector<Facet> out;
  ForEachSubset(n, d, [&](const std::vector<int>& sub) {
    Eigen::VectorXd normal;
    if (d == 1) {
      normal = Eigen::VectorXd::Ones(1);
    } else {
      Eigen::MatrixXd diff(d - 1, d);
      for (int i = 1; i < d; ++i)
        diff.row(i - 1) = (pts[sub[i]] - pts[sub[0]]).transpose();
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(diff, Eigen::ComputeFullV);
      const Eigen::VectorXd& s = svd.singularValues();
      if (s.size() < d - 1 || s(d - 2) <= tol * std::max(1.0, s(0))) return;
      normal = svd.matrixV().col(d - 1);
    }
    double off = normal.dot(pts[sub[0]]);
    int above = 0, below = 0;
    for (const auto& p : pts) {
      const double v = normal.dot(p) - off;
      if (v > eps) ++above;
      if (v < -eps) ++below;
    }
    if (above > 0 && below > 0) return;
    if (above > 0) {
      normal = -normal;
      off = -off;
    }
    // Canonicalize to avoid duplicates from different subsets.
    std::vector<int> members;
    for (int j = 0; j < n; ++j)
      if (std::abs(normal.dot(pts[j]) - off) <= eps) members.push_back(j);
    for (const auto& f : out)
      if (f.members == members) return;
    out.push_back({normal, off, members});
  });
  return out;
}

void TriangulateRec(const std::vector<Eigen::VectorXd>& pts,
                    const std::vector<int>& ids, double tol,
                    std::vector<std::vector<int>>* out) {
  const int d = static_cast<int>(pts.front().size());
  if (static_cast<int>(pts.size()) == d + 1) {
    out->push_back(ids);
    return;
  }
  if (d == 0) {
    out->push_back({ids.front()});
    return;
  }
  // Lexicographically smallest point is extreme.
  int apex = 0;
  for (int j = 1; j < static_cast<int>(pts.size()); ++j) {
    if (std::lexicographical_compare(pts[j].data(), pts[j].data() + d,
                                     pts[apex].data(), pts[apex].data() + d))
      apex = j;
  }
  for (const Facet& f : Facets(pts, tol)) {
    if (std::find(f.members.begin(), f.members.end(), apex) != f.members.end())
      continue;
    std::vector<Eigen::VectorXd> fp;
    std::vector<int> fid;
    for (int j : f.members) {
      fp.push_back(pts[j]);
      fid.push_back(ids[j]);
    }
    // Local coordinates within the facet's affine span.
    const Eigen::MatrixXd basis = AffineBasis(fp, tol);
    std::vector<Eigen::VectorXd> local;
    for (const auto& p : fp) local.push_back(basis.transpose() * (p - fp[0]));
    std::vector<std::vector<int>> sub;
    TriangulateRec(local, fid, tol, &sub);
    for (auto& s : sub) {
      s.push_back(ids[apex]);
      out->push_back(std::move(s));
    }
  }
}

}  // namespace

bool Halfspaces::Contains(const Eigen::VectorXd& x, double tol) const {
  return size() == 0 || ((a * x - b).array() <= tol).all();
}

double Halfspaces::Violation(const Eigen::VectorXd& x) const {
  if (size() == 0) return -kInf;
  return (a * x - b).maxCoeff();
}

int AffineRank(const std::vector<Eigen::VectorXd>& points, double tol) {
  if (points.empty()) return -1;
  return static_cast<int>(AffineBasis(points, tol).cols());
}

Halfspaces HullHalfspaces(const std::vector<Eigen::VectorXd>& points,
                          double tol) {
  const int n = static_cast<int>(points.front().size());
  if (AffineRank(points, tol) != n)
    throw InvalidArgument("hull is not full-dimensional");
  const auto facets = Facets(points, tol);
  Halfspaces h;
  h.a.resize(static_cast<Eigen::Index>(facets.size()), n);
  h.b.resize(static_cast<Eigen::Index>(facets.size()));
  for (std::size_t i = 0; i < facets.size(); ++i) {
    h.a.row(i) = facets[i].normal.transpose();
    h.b(i) = facets[i].offset;
  }
  return h;
}

std::vector<std::vector<int>> Triangulate(
    const std::vector<Eigen::VectorXd>& points, double tol) {
  const Eigen::MatrixXd basis = AffineBasis(points, tol);
  std::vector<Eigen::VectorXd> local;
  for (const auto& p : points)
    local.push_back(basis.transpose() * (p - points[0]));
  std::vector<int> ids(points.size());
  for (std::size_t j = 0; j < ids.size(); ++j) ids[j] = static_cast<int>(j);
  std::vector<std::vector<int>> out;
  if (basis.cols() == 0) {
    out.push_back({0});
    return out;
  }
  TriangulateRec(local, ids, tol, &out);
  for (auto& s : out) std::sort(s.begin(), s.end());
  return out;
}

std::vector<HullSample> BarycentricGrid(const Hull& hull, int per_edge) {
  if (per_edge < 2) throw InvalidArgument("BarycentricGrid: per_edge < 2");
  const int nv = hull.size();
  const int res = per_edge - 1;
  std::vector<HullSample> out;
  std::map<std::vector<long long>, std::size_t> seen;
  double scale = 1.0;
  for (const auto& v : hull.vertices())
    scale = std::max(scale, v.cwiseAbs().maxCoeff());
  const double quantum = 1e-9 * scale;
  auto add = [&](const Eigen::VectorXd& lambda) {
    HullSample s{lambda, hull.Point(lambda)};
    std::vector<long long> key(s.x.size());
    for (Eigen::Index i = 0; i < s.x.size(); ++i)
      key[i] = std::llround(s.x(i) / quantum);
    if (seen.emplace(key, out.size()).second) out.push_back(std::move(s));
  };
  for (const auto& simplex : Triangulate(hull.vertices())) {
    const int k = static_cast<int>(simplex.size());
    // Compositions of res into k nonnegative parts.
    std::vector<int> parts(k, 0);
    parts[k - 1] = res;
    std::function<void(int, int)> rec = [&](int pos, int left) {
      if (pos == k - 1) {
        parts[pos] = left;
        Eigen::VectorXd lambda = Eigen::VectorXd::Zero(nv);
        for (int i = 0; i < k; ++i)
          lambda(simplex[i]) = static_cast<double>(parts[i]) / res;
        add(lambda);
        return;
      }
      for (int v = left; v >= 0; --v) {
        parts[pos] = v;
        rec(pos + 1, left - v);
      }
    };
    rec(0, res);
  }
  return out;
}

std::vector<HullSample> RandomHullSamples(const Hull& hull, int count,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::vector<HullSample> out;
  out.reserve(count);
  const int nv = hull.size();
  for (int s = 0; s < count; ++s) {
    Eigen::VectorXd lambda(nv);
    for (int j = 0; j < nv; ++j) lambda(j) = expo(rng);
    lambda /= lambda.sum();
    out.push_back({lambda, hull.Point(lambda)});
  }
  return out;
}

std::vector<Eigen::VectorXd> EnumerateVertices(const Halfspaces& h,
                                               double tol) {
  const int n = static_cast<int>(h.a.cols());
  std::vector<Eigen::VectorXd> out;
  ForEachSubset(h.size(), n, [&](const std::vector<int>& sub) {
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
      a.row(i) = h.a.row(sub[i]);
      b(i) = h.b(sub[i]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lu.setThreshold(1e-10);
    if (lu.rank() < n) return;
    const Eigen::VectorXd x = lu.solve(b);
    if (!h.Contains(x, tol * std::max(1.0, x.cwiseAbs().maxCoeff()))) return;
    for (const auto& v : out)
      if ((v - x).cwiseAbs().maxCoeff() <= 1e-8) return;
    out.push_back(x);
  });
  return out;
}

std::vector<int> IrredundantRows(const Halfspaces& h, double tol) {
  std::vector<bool> keep(h.size(), true);
  for (int r = 0; r < h.size(); ++r) {
    LpBuilder lp(static_cast<int>(h.a.cols()));
    lp.SetObjective(h.a.row(r).transpose());
    for (int s = 0; s < h.size(); ++s) {
      if (s == r || !keep[s]) continue;
      lp.AddLessEqual(h.a.row(s), h.b(s));
    }
    // Cap the tested row slightly beyond its offset to keep the LP bounded.
    lp.AddLessEqual(h.a.row(r), h.b(r) + 1.0);
    const LpResult res = SolveLp(lp.Build());
    if (res.status == LpStatus::kOptimal && res.value <= h.b(r) + tol)
      keep[r] = false;
  }
  std::vector<int> out;
  for (int r = 0; r < h.size(); ++r)
    if (keep[r]) out.push_back(r);
  return out;
}

bool BarycentricWeights(const Eigen::VectorXd& x,
                        const std::vector<Eigen::VectorXd>& vertices,
                        const Eigen::VectorXd& objective,
                        Eigen::VectorXd* lambda, double tol) {
  const int nv = static_cast<int>(vertices.size());
  const int n = static_cast<int>(x.size());
  LpBuilder lp(nv);
  if (objective.size() == nv) lp.SetObjective(objective);
  for (int j = 0; j < nv; ++j) lp.SetBounds(j, 0.0, kInf);
  for (int i = 0; i < n; ++i) {
    Eigen::RowVectorXd row(nv);
    for (int j = 0; j < nv; ++j) row(j) = vertices[j](i);
    lp.AddEqual(row, x(i));
  }
  lp.AddEqual(Eigen::RowVectorXd::Ones(nv), 1.0);
  const LpResult res = SolveLp(lp.Build());
  if (res.status != LpStatus::kOptimal) return false;
  Eigen::VectorXd l = res.z.cwiseMax(0.0);
  l /= l.sum();
  Eigen::VectorXd recon = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < nv; ++j) recon += l(j) * vertices[j];
  if ((recon - x).cwiseAbs().maxCoeff() > std::max(tol, 1e-8)) return false;
  *lambda = l;
  return true;
}

}  // namespace cbfhull::geometry
