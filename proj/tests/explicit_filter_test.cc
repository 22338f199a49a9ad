#include <random>

#include <doctest.h>

#include "cbfhull/case_studies.h"
#include "cbfhull/errors.h"
#include "cbfhull/explicit_filter.h"
#include "cbfhull/geometry.h"
#include "cbfhull/qp.h"

using namespace cbfhull;

namespace {

Eigen::VectorXd V(std::initializer_list<double> v) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

Eigen::VectorXd OnlineQp(const Problem& p, const Eigen::VectorXd& x) {
  const StackedValue v = p.map.Eval(x);
  return SolveQpProjection(p.u_des(x), v.psi, v.delta, p.input_set).u;
}

const CriticalRegion& RegionWith(const ExplicitController& ec,
                                 const ActiveSet& active) {
  for (const CriticalRegion& r : ec.regions())
    if (r.active == active) return r;
  FAIL("region not found: " << ToString(active));
  throw std::logic_error("unreachable");
}

// Constant Psi, affine delta with delta0 large enough that u = 0 is feasible
// on the whole hull; affine u_des pushes the optimum onto various rows.
Problem RandomAffine(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-1, 1);
  const int n = 2;
  const int m = 1 + static_cast<int>(rng() % 2);
  const int p = 2 + static_cast<int>(rng() % 2);
  std::vector<Eigen::VectorXd> verts;
  for (int j = 0; j < 5; ++j) verts.push_back(V({coef(rng), coef(rng)}));
  std::vector<QuadFunc> psi, delta;
  for (int i = 0; i < p; ++i) {
    for (int k = 0; k < m; ++k) psi.push_back(QuadFunc::Constant(n, coef(rng)));
    const Eigen::Vector2d c(coef(rng), coef(rng));
    delta.push_back(QuadFunc::Affine(c, c.lpNorm<1>() + 0.1 + std::abs(coef(rng))));
  }
  DesiredInput u_des;
  u_des.gain = 3 * Eigen::MatrixXd::Random(m, n);
  u_des.offset = 2 * Eigen::VectorXd::Random(m);
  return Problem{StackedMap(n, m, p, psi, delta), Hull(verts),
                 InputSet::FromBox(-Eigen::VectorXd::Constant(m, 1.5),
                                   Eigen::VectorXd::Constant(m, 1.5)),
                 u_des, std::nullopt};
}

}  // namespace

TEST_CASE("ActiveSetAt on the double integrator") {
  const Problem p = Case3().problem;
  ActiveSetResult r = ActiveSetAt(p.map, V({0, 1}), p.input_set, p.u_des);
  CHECK(r.set.cbf == std::vector<int>{1});
  CHECK(r.set.input.empty());
  CHECK(ToString(r.set) == "A={2} B={}");
  r = ActiveSetAt(p.map, V({0, 0}), p.input_set, p.u_des);
  CHECK(r.set.empty());
  CHECK(r.solution.u(0) == doctest::Approx(0.0));
  DesiredInput small = p.u_des;
  small.offset = V({0.2});
  CHECK(ActiveSetAt(p.map, V({0.1, 0.1}), p.input_set, small).set.empty());
  CHECK_THROWS_AS(ActiveSetAt(Example1().problem.map, V({1.5}),
                              Example1().problem.input_set,
                              DesiredInput::Zero(1, 1)),
                  InfeasibleQP);
}

TEST_CASE("KktAffineLaw") {
  const Problem p = Case3().problem;
  const AffineData d = ExtractAffineData(p.map, p.hull);
  AffineLaw law = KktAffineLaw(d, p.input_set, p.u_des, ActiveSet{{1}, {}});
  CHECK(law.F(0, 0) == doctest::Approx(-1.1));
  CHECK(law.F(0, 1) == doctest::Approx(-1.9));
  CHECK(law.f(0) == doctest::Approx(1.0));
  // lambda = u - u_des times -Psi_2 = -u.
  CHECK(law.Lambda(V({0, 1}))(0) == doctest::Approx(0.9));

  law = KktAffineLaw(d, p.input_set, p.u_des, ActiveSet{{0}, {}});
  CHECK(law.F(0, 0) == doctest::Approx(-1.1));
  CHECK(law.F(0, 1) == doctest::Approx(-1.9));
  CHECK(law.f(0) == doctest::Approx(-1.0));

  DesiredInput ud;
  ud.gain = Eigen::MatrixXd::Constant(1, 2, 0.3);
  ud.offset = V({-0.2});
  law = KktAffineLaw(d, p.input_set, ud, ActiveSet{});
  CHECK(law.F.isApprox(ud.gain));
  CHECK(law.f.isApprox(ud.offset));

  // Both CBF rows have parallel gradients.
  CHECK_THROWS_AS(KktAffineLaw(d, p.input_set, p.u_des, ActiveSet{{0, 1}, {}}),
                  LicqViolated);
}

TEST_CASE("ExtractAffineData rejects state-dependent Psi") {
  const Problem p = Case2().problem;
  CHECK_THROWS_AS(ExtractAffineData(p.map, p.hull), Assumption2Violated);
  const Problem ex = Example1().problem;
  CHECK_THROWS_AS(ExtractAffineData(ex.map, ex.hull), Assumption2Violated);
}

TEST_CASE("partition of the double integrator hull") {
  const Problem p = Case3().problem;
  const ExplicitController ec = PartitionHull(p.map, p.hull, p.input_set, p.u_des);
  REQUIRE(ec.regions().size() == 3);
  const CriticalRegion& h1 = RegionWith(ec, {});
  const CriticalRegion& h2 = RegionWith(ec, {{1}, {}});
  const CriticalRegion& h3 = RegionWith(ec, {{0}, {}});
  CHECK(h1.law.F.isZero(1e-12));
  CHECK(h1.law.f.isZero(1e-12));
  CHECK(h2.law.f(0) == doctest::Approx(1.0));
  CHECK(h3.law.f(0) == doctest::Approx(-1.0));
  // Non-hull rows of H1 are +-(1.1, 1.9) x <= 1 after scaling.
  const geometry::Halfspaces hull = geometry::HullHalfspaces(p.hull.vertices());
  int boundaries = 0;
  for (int r = 0; r < h1.rows.size(); ++r) {
    bool is_hull = false;
    for (int s = 0; s < hull.size(); ++s)
      is_hull |= (h1.rows.a.row(r) - hull.a.row(s)).norm() < 1e-9 &&
                 std::abs(h1.rows.b(r) - hull.b(s)) < 1e-9;
    if (is_hull) continue;
    ++boundaries;
    const double scale = 1.1 / std::abs(h1.rows.a(r, 0));
    const Eigen::RowVectorXd a = h1.rows.a.row(r) * scale;
    CHECK(std::abs(std::abs(a(1)) - 1.9) <= 1e-8);
    CHECK(a(0) * a(1) > 0);
    CHECK(h1.rows.b(r) * scale == doctest::Approx(1.0).epsilon(1e-8));
  }
  CHECK(boundaries == 2);
  for (const CriticalRegion& r : ec.regions()) {
    const AffineData d = ExtractAffineData(p.map, p.hull);
    CHECK(VerifyRegion(r, d, p.input_set, p.u_des).ok);
  }
}

TEST_CASE("region verification") {
  const Problem p = Case3().problem;
  const AffineData d = ExtractAffineData(p.map, p.hull);
  const ExplicitController ec = PartitionHull(p.map, p.hull, p.input_set, p.u_des);
  CriticalRegion straddle = RegionWith(ec, {});
  // Pull a vertex of H1 across 1.1 x1 + 1.9 x2 = 1.
  straddle.vertices.push_back(V({0, 1}));
  const RegionCheck bad = VerifyRegion(straddle, d, p.input_set, p.u_des);
  CHECK_FALSE(bad.ok);
  CHECK_FALSE(bad.message.empty());

  // Strict mode on the closed H1: its vertices touch the boundaries.
  const CriticalRegion& h1 = RegionWith(ec, {});
  CHECK_FALSE(VerifyStrictRegion(h1.vertices, p.map, p.input_set, p.u_des).ok);
  // A small triangle inside H1 passes.
  CHECK(VerifyStrictRegion({V({-0.1, 0}), V({0.1, 0}), V({0, 0.1})}, p.map,
                           p.input_set, p.u_des)
            .ok);
  // Straddling triangle fails.
  CHECK_FALSE(VerifyStrictRegion({V({0, 0}), V({0, 1}), V({0.2, 0.2})}, p.map,
                                 p.input_set, p.u_des)
                  .ok);
}

TEST_CASE("single region when the desired input is always admissible") {
  Problem p = Case3().problem;
  const Hull small({V({-0.2, -0.2}), V({0.3, -0.1}), V({0, 0.25})});
  const ExplicitController ec = PartitionHull(p.map, small, p.input_set, p.u_des);
  REQUIRE(ec.regions().size() == 1);
  CHECK(ec.regions()[0].active.empty());
  CHECK(EvalExplicit(ec, V({0, 0}))(0) == 0.0);
}

TEST_CASE("tighter input bounds create bound-active regions") {
  Problem p = Case3().problem;
  const InputSet tight = InputSet::FromBox(V({-0.5}), V({0.5}));
  // On the full hull the tightened problem is infeasible near (0, +-1), where
  // row 2 demands u <= -0.9.
  CHECK_THROWS_AS(PartitionHull(p.map, p.hull, tight, p.u_des),
                  UnresolvedRegion);
  // Shrink the hull to keep |1.1 x1 + 1.9 x2| <= 1.5 and ask for u = 0.8.
  std::vector<Eigen::VectorXd> verts;
  for (const Eigen::VectorXd& v : p.hull.vertices()) verts.push_back(0.7 * v);
  const Hull shrunk(verts);
  DesiredInput push = p.u_des;
  push.offset = V({0.8});
  const ExplicitController ec = PartitionHull(p.map, shrunk, tight, push);
  bool bound_region = false;
  for (const CriticalRegion& r : ec.regions())
    bound_region |= !r.active.input.empty();
  CHECK(bound_region);
  // Upper bound active at the origin (row 2 allows u <= 1).
  CHECK(EvalExplicit(ec, V({0, 0}))(0) == doctest::Approx(0.5));
  // Row 2 active at (0, 0.3): u = 1 - 0.57.
  CHECK(EvalExplicit(ec, V({0, 0.3}))(0) == doctest::Approx(0.43));
  for (const geometry::HullSample& s : geometry::RandomHullSamples(shrunk, 500, 2)) {
    const StackedValue v = p.map.Eval(s.x);
    CHECK((EvalExplicit(ec, s.x) -
           SolveQpProjection(push(s.x), v.psi, v.delta, tight).u)
              .norm() <= 1e-7);
  }
}

TEST_CASE("EvalExplicit") {
  const Problem p = Case3().problem;
  const ExplicitController ec = PartitionHull(p.map, p.hull, p.input_set, p.u_des);
  CHECK(EvalExplicit(ec, V({0, 0.8}))(0) == doctest::Approx(-0.52));
  CHECK(EvalExplicit(ec, V({0, 0}))(0) == doctest::Approx(0.0));
  // Shared boundary point, 1.1 x1 + 1.9 x2 = 1.
  const Eigen::VectorXd xb = V({0, 1.0 / 1.9});
  const AffineData d = ExtractAffineData(p.map, p.hull);
  const double u1 = RegionWith(ec, {}).law.U(xb)(0);
  const double u2 = RegionWith(ec, {{1}, {}}).law.U(xb)(0);
  CHECK(std::abs(u1 - u2) <= 1e-12);
  CHECK(ec.Locate(V({0, 0})) >= 0);
  CHECK_THROWS_AS(EvalExplicit(ec, V({1, 1})), OutsideHull);
  CHECK_THROWS_AS(EvalExplicit(ec, V({1})), DimensionMismatch);
  (void)d;
}

TEST_CASE("NoRegion when the partition has a gap") {
  const Problem p = Case3().problem;
  const ExplicitController full = PartitionHull(p.map, p.hull, p.input_set, p.u_des);
  std::vector<CriticalRegion> partial = {RegionWith(full, {})};
  const ExplicitController gap(partial, full.hull(), 2, 1);
  CHECK_THROWS_AS(EvalExplicit(gap, V({0, 0.9})), NoRegion);
}

TEST_CASE("interpolation over region vertices") {
  const Problem p = Case3().problem;
  const ExplicitController ec = PartitionHull(p.map, p.hull, p.input_set, p.u_des);
  const CriticalRegion& h2 = RegionWith(ec, {{1}, {}});
  std::vector<Eigen::VectorXd> optima;
  for (const Eigen::VectorXd& v : h2.vertices) optima.push_back(OnlineQp(p, v));
  REQUIRE(h2.vertices.size() >= 3);
  const Eigen::VectorXd mid = 0.5 * (h2.vertices[0] + h2.vertices[1]);
  CHECK(InterpolateOnRegion(mid, h2.vertices, optima)(0) ==
        doctest::Approx(h2.law.U(mid)(0)).epsilon(1e-10));
  CHECK(InterpolateOnRegion(h2.vertices[2], h2.vertices, optima)(0) ==
        doctest::Approx(optima[2](0)).epsilon(1e-10));
  CHECK_THROWS_AS(InterpolateOnRegion(V({0, 0}), h2.vertices, optima),
                  NotInRegion);

  // On the whole hull for the six-vertex, single-region shrunken problem the
  // weights are not unique; two different objectives give the same value.
  const std::vector<Eigen::VectorXd> hex = {V({-0.2, 0}), V({-0.2, 0.2}),
                                            V({0, -0.2}), V({0, 0.2}),
                                            V({0.2, 0}),  V({0.2, -0.2})};
  DesiredInput ud;
  ud.gain = Eigen::MatrixXd::Constant(1, 2, 0.4);
  ud.offset = V({0.1});
  Problem q = p;
  q.u_des = ud;
  std::vector<Eigen::VectorXd> hex_opt;
  for (const Eigen::VectorXd& v : hex) hex_opt.push_back(OnlineQp(q, v));
  const Eigen::VectorXd x = V({0.05, 0.02});
  Eigen::VectorXd up(6), down(6);
  up << 1, 0, 0, 0, 0, 0;
  down << 0, 0, 0, 0, 0, 1;
  Eigen::VectorXd la, lb;
  REQUIRE(geometry::BarycentricWeights(x, hex, up, &la));
  REQUIRE(geometry::BarycentricWeights(x, hex, down, &lb));
  CHECK((la - lb).norm() > 1e-3);
  const double ua = InterpolateOnRegion(x, hex, hex_opt, up)(0);
  const double ub = InterpolateOnRegion(x, hex, hex_opt, down)(0);
  CHECK(std::abs(ua - ub) <= 1e-10);
  CHECK(ua == doctest::Approx(OnlineQp(q, x)(0)).epsilon(1e-9));
}

TEST_CASE("explicit law matches the online QP") {
  const Problem p = Case3().problem;
  const ExplicitController ec = PartitionHull(p.map, p.hull, p.input_set, p.u_des);
  for (const geometry::HullSample& s : geometry::RandomHullSamples(p.hull, 1000, 8))
    CHECK((EvalExplicit(ec, s.x) - OnlineQp(p, s.x)).norm() <= 1e-7);

  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const Problem q = RandomAffine(rng);
    const ExplicitController eq =
        PartitionHull(q.map, q.hull, q.input_set, q.u_des);
    for (const geometry::HullSample& s :
         geometry::RandomHullSamples(q.hull, 1000, trial + 1))
      CHECK((EvalExplicit(eq, s.x) - OnlineQp(q, s.x)).norm() <= 1e-7);
  }
}

TEST_CASE("interpolation agrees with the explicit law inside regions") {
  const Problem p = Case3().problem;
  const ExplicitController ec = PartitionHull(p.map, p.hull, p.input_set, p.u_des);
  std::mt19937_64 rng(5);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  for (const CriticalRegion& r : ec.regions()) {
    std::vector<Eigen::VectorXd> optima;
    for (const Eigen::VectorXd& v : r.vertices) optima.push_back(OnlineQp(p, v));
    for (int i = 0; i < 100; ++i) {
      Eigen::VectorXd w(r.vertices.size());
      for (int j = 0; j < w.size(); ++j) w(j) = gamma(rng);
      w /= w.sum();
      Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
      for (int j = 0; j < w.size(); ++j) x += w(j) * r.vertices[j];
      CHECK((InterpolateOnRegion(x, r.vertices, optima) - EvalExplicit(ec, x))
                .norm() <= 1e-8);
    }
  }
}

TEST_CASE("continuity across region boundaries") {
  const Problem p = Case3().problem;
  const ExplicitController ec = PartitionHull(p.map, p.hull, p.input_set, p.u_des);
  // Lipschitz bound: largest gain row norm over the regions.
  double lip = 0;
  for (const CriticalRegion& r : ec.regions())
    lip = std::max(lip, r.law.F.operatorNorm());
  const auto ends = geometry::RandomHullSamples(p.hull, 20000, 3);
  int crossing = 0;
  for (int s = 0; s + 1 < static_cast<int>(ends.size()) && crossing < 100; s += 2) {
    const Eigen::VectorXd a = ends[s].x, b = ends[s + 1].x;
    if (ec.Locate(a) == ec.Locate(b)) continue;
    ++crossing;
    const double len = (b - a).norm();
    const int steps = static_cast<int>(std::ceil(len / 1e-4));
    Eigen::VectorXd prev = EvalExplicit(ec, a);
    for (int k = 1; k <= steps; ++k) {
      const Eigen::VectorXd x = a + (b - a) * (double(k) / steps);
      const Eigen::VectorXd u = EvalExplicit(ec, x);
      CHECK((u - prev).norm() <= lip * len / steps + 1e-12);
      prev = u;
    }
  }
  CHECK(crossing == 100);
}

TEST_CASE("multipliers stay nonnegative in their regions") {
  const Problem p = Case3().problem;
  const ExplicitController ec = PartitionHull(p.map, p.hull, p.input_set, p.u_des);
  for (const geometry::HullSample& s : geometry::RandomHullSamples(p.hull, 2000, 4)) {
    const int idx = ec.Locate(s.x);
    REQUIRE(idx >= 0);
    const AffineLaw& law = ec.regions()[idx].law;
    if (law.lambda0.size() > 0) CHECK(law.Lambda(s.x).minCoeff() >= -1e-9);
    if (law.nu0.size() > 0) CHECK(law.Nu(s.x).minCoeff() >= -1e-9);
  }
}

TEST_CASE("parallel and serial partitions agree") {
  const Problem p = Case3().problem;
  PartitionOptions serial;
  serial.parallel = false;
  const ExplicitController a = PartitionHull(p.map, p.hull, p.input_set, p.u_des);
  const ExplicitController b =
      PartitionHull(p.map, p.hull, p.input_set, p.u_des, serial);
  REQUIRE(a.regions().size() == b.regions().size());
  for (size_t i = 0; i < a.regions().size(); ++i) {
    CHECK(a.regions()[i].active == b.regions()[i].active);
    CHECK(a.regions()[i].law.F.isApprox(b.regions()[i].law.F));
  }
  CHECK(a.stats.seeds == b.stats.seeds);
}
