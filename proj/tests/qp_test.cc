#include <random>

#include <doctest.h>

#include "cbfhull/case_studies.h"
#include "cbfhull/errors.h"
#include "cbfhull/lp.h"
#include "cbfhull/qp.h"

using namespace cbfhull;

namespace {

Eigen::VectorXd V(std::initializer_list<double> v) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

struct RandomQp {
  Eigen::MatrixXd psi;
  Eigen::VectorXd delta;
  Eigen::VectorXd u_des;
  InputSet u_set;
};

// Feasible by construction: u0 strictly inside the box satisfies every row.
RandomQp MakeRandomQp(std::mt19937_64& rng, int m, int p) {
  std::uniform_real_distribution<double> coef(-1, 1);
  std::uniform_real_distribution<double> slack(0.0, 0.5);
  Eigen::VectorXd u0(m);
  for (int k = 0; k < m; ++k) u0(k) = 0.5 * coef(rng);
  Eigen::MatrixXd psi(p, m);
  Eigen::VectorXd delta(p);
  for (int i = 0; i < p; ++i) {
    for (int k = 0; k < m; ++k) psi(i, k) = coef(rng);
    delta(i) = -psi.row(i).dot(u0) + slack(rng);
  }
  Eigen::VectorXd u_des(m);
  for (int k = 0; k < m; ++k) u_des(k) = 3 * coef(rng);
  return {psi, delta, u_des,
          InputSet::FromBox(-Eigen::VectorXd::Ones(m), Eigen::VectorXd::Ones(m))};
}

}  // namespace

TEST_CASE("projection at x = (0, 1) on the double integrator") {
  const CaseStudy cs = Case3();
  const StackedValue v = cs.problem.map.Eval(V({0, 1}));
  const QpSolution s =
      SolveQpProjection(V({0}), v.psi, v.delta, cs.problem.input_set);
  CHECK(s.u(0) == doctest::Approx(-0.9).epsilon(1e-12));
  CHECK(s.active_cbf == std::vector<int>{1});
  CHECK(s.active_input.empty());
  CHECK(s.lambda(1) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(s.lambda(0) == 0.0);
  CHECK_FALSE(s.weakly_active);
  CHECK(ComputeKktResiduals(s, V({0}), v.psi, v.delta, cs.problem.input_set)
            .max() <= 1e-10);
}

TEST_CASE("interior desired input is returned unchanged") {
  const CaseStudy cs = Case3();
  const StackedValue v = cs.problem.map.Eval(V({0, 0}));
  const QpSolution s =
      SolveQpProjection(V({0.3}), v.psi, v.delta, cs.problem.input_set);
  CHECK(s.u(0) == doctest::Approx(0.3));
  CHECK(s.active_cbf.empty());
  CHECK(s.active_input.empty());
  CHECK(s.objective == doctest::Approx(0.0));
}

TEST_CASE("input bound becomes active") {
  const CaseStudy cs = Case3();
  const StackedValue v = cs.problem.map.Eval(V({0, 0}));
  const QpSolution s =
      SolveQpProjection(V({5}), v.psi, v.delta, cs.problem.input_set);
  // CBF row 2 caps u at 1, as does the box.
  CHECK(s.u(0) == doctest::Approx(1.0));
  CHECK(ComputeKktResiduals(s, V({5}), v.psi, v.delta, cs.problem.input_set)
            .max() <= 1e-8);
}

TEST_CASE("infeasible constraints at x = 1.5 in the one-dimensional example") {
  const CaseStudy ex = Example1();
  const StackedValue v = ex.problem.map.Eval(V({1.5}));
  for (double ud : {0.0, 1.0, 7.0}) {
    try {
      SolveQpProjection(V({ud}), v.psi, v.delta, ex.problem.input_set);
      FAIL("expected InfeasibleQP");
    } catch (const InfeasibleQP& e) {
      CHECK(e.margin() < 0);
    }
  }
}

TEST_CASE("dimension checks") {
  const CaseStudy cs = Case3();
  const StackedValue v = cs.problem.map.Eval(V({0, 0}));
  CHECK_THROWS_AS(SolveQpProjection(V({0, 0}), v.psi, v.delta,
                                    cs.problem.input_set),
                  DimensionMismatch);
  CHECK_THROWS_AS(SolveQpProjection(V({0}), v.psi, V({1}), cs.problem.input_set),
                  DimensionMismatch);
}

TEST_CASE("KKT residuals on random feasible problems") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = 1 + trial % 4;
    const int p = 1 + (trial / 4) % 6;
    RandomQp q = MakeRandomQp(rng, m, p);
    const QpSolution s = SolveQpProjection(q.u_des, q.psi, q.delta, q.u_set);
    const KktResiduals r = ComputeKktResiduals(s, q.u_des, q.psi, q.delta, q.u_set);
    CHECK(r.max() <= 1e-8);
    CHECK((s.lambda.array() >= 0).all());
    CHECK((s.nu.array() >= 0).all());
  }
}

TEST_CASE("single input projection matches a fine grid") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    RandomQp q = MakeRandomQp(rng, 1, 1 + trial % 5);
    const QpSolution s = SolveQpProjection(q.u_des, q.psi, q.delta, q.u_set);
    double best = 0, best_cost = kInf;
    for (int i = 0; i <= 20000; ++i) {
      const double u = -1.0 + 1e-4 * i;
      if (((q.psi.col(0) * u + q.delta).array() < 0).any()) continue;
      const double cost = (u - q.u_des(0)) * (u - q.u_des(0));
      if (cost < best_cost) best_cost = cost, best = u;
    }
    REQUIRE(best_cost < kInf);
    CHECK(std::abs(s.u(0) - best) <= 2e-4);
  }
}

TEST_CASE("re-projection is idempotent and warm starts agree") {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 200; ++trial) {
    RandomQp q = MakeRandomQp(rng, 1 + trial % 3, 2 + trial % 4);
    const QpSolution s = SolveQpProjection(q.u_des, q.psi, q.delta, q.u_set);
    const QpSolution again = SolveQpProjection(s.u, q.psi, q.delta, q.u_set);
    CHECK((again.u - s.u).norm() <= 1e-9);
    const QpWarmStart warm = WarmStartFrom(s, static_cast<int>(q.delta.size()));
    const QpSolution w =
        SolveQpProjection(q.u_des, q.psi, q.delta, q.u_set, {}, &warm);
    CHECK((w.u - s.u).norm() <= 1e-9);
  }
}

TEST_CASE("general polytope input set") {
  Eigen::MatrixXd g(3, 2);
  g << 1, 1, -1, 0, 0, -1;
  const InputSet simplex = InputSet::FromPolytope(g, V({1, 0, 0}));
  const Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(1, 2);
  const QpSolution s = SolveQpProjection(V({2, 2}), psi, V({1}), simplex);
  CHECK(s.u(0) == doctest::Approx(0.5));
  CHECK(s.u(1) == doctest::Approx(0.5));
  CHECK(s.active_input == std::vector<int>{0});
  CHECK(s.nu(0) == doctest::Approx(1.5));
}
