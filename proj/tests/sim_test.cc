#include <cmath>
#include <memory>

#include <doctest.h>

#include "cbfhull/case_studies.h"
#include "cbfhull/certificates.h"
#include "cbfhull/controllers.h"
#include "cbfhull/errors.h"
#include "cbfhull/explicit_filter.h"
#include "cbfhull/sim.h"

using namespace cbfhull;

namespace {

Eigen::VectorXd V(std::initializer_list<double> v) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

std::vector<Eigen::VectorXd> ThermalStarts(const CaseStudy& cs) {
  return RandomStates(cs.problem.hull, cs.trajectories, cs.seed);
}

}  // namespace

TEST_CASE("RK4 converges with order four on x' = -x") {
  auto rhs = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return -x; };
  std::vector<double> errors;
  for (double dt : {0.1, 0.05, 0.025}) {
    Eigen::VectorXd x = V({1.0});
    const int steps = static_cast<int>(std::lround(1.0 / dt));
    for (int k = 0; k < steps; ++k) x = Rk4Step(rhs, x, dt);
    errors.push_back(std::abs(x(0) - std::exp(-1.0)));
  }
  for (size_t i = 0; i + 1 < errors.size(); ++i) {
    const double order = std::log2(errors[i] / errors[i + 1]);
    CHECK(order >= 3.8);
  }
}

TEST_CASE("Integrate on LTI dynamics matches the closed form") {
  const Dynamics dyn = Dynamics::Lti(-Eigen::MatrixXd::Identity(1, 1),
                                     Eigen::MatrixXd::Zero(1, 1));
  const Trajectory t =
      Integrate(dyn, ConstantController(V({0})), V({2}), 1.0, 0.01);
  REQUIRE(t.times.size() == t.states.size());
  CHECK(t.times.back() == doctest::Approx(1.0));
  CHECK(t.states.back()(0) == doctest::Approx(2 * std::exp(-1.0)).epsilon(1e-9));
  for (size_t k = 1; k < t.times.size(); ++k)
    CHECK(t.times[k] - t.times[k - 1] == doctest::Approx(0.01));
}

TEST_CASE("zero dynamics give a constant trajectory") {
  const Dynamics dyn = Dynamics::Lti(Eigen::MatrixXd::Zero(2, 2),
                                     Eigen::MatrixXd::Zero(2, 1));
  const Trajectory t = Integrate(dyn, ConstantController(V({5})), V({0.3, -0.4}),
                                 2.0, 0.1);
  for (const Eigen::VectorXd& x : t.states) CHECK(x.isApprox(V({0.3, -0.4})));
}

TEST_CASE("ThreeRoom dynamics reproduce the stacked thermal data") {
  const Dynamics dyn = ThreeRoom();
  const Eigen::VectorXd x = V({26, 27.5, 29});
  const Eigen::VectorXd u = V({0.2, 0.5, 0.9});
  const Eigen::VectorXd dx = dyn(x, u);
  for (int i = 0; i < 3; ++i) {
    const int ip = (i + 1) % 3, im = (i + 2) % 3;
    const double want = 0.05 * (x(ip) + x(im) - 2 * x(i)) + 0.06 * (-1 - x(i)) +
                        0.08 * (50 - x(i)) * u(i);
    CHECK(dx(i) == doctest::Approx(want).epsilon(1e-12));
  }
  // Row i of the lower-bound map: Psi_ii = 4 - 0.08 x_i,
  // delta_i = 0.05(x_{i+1} + x_{i-1}) - 0.16 x_i - 0.06 + x_i - 25.
  const StackedMap map = Case1().problem.map;
  const StackedValue v = map.Eval(x);
  for (int i = 0; i < 3; ++i) {
    const int ip = (i + 1) % 3, im = (i + 2) % 3;
    CHECK(v.psi(i, i) == doctest::Approx(4 - 0.08 * x(i)));
    CHECK(v.delta(i) == doctest::Approx(0.05 * (x(ip) + x(im)) + 0.84 * x(i) -
                                        25.06));
  }
}

TEST_CASE("constant witness keeps the rooms in the safe set") {
  const CaseStudy cs = Case2();
  const auto runs = BatchIntegrate(*cs.dynamics,
                                   ConstantController(*cs.reference_witness),
                                   ThermalStarts(cs), cs.horizon, cs.dt, cs.cbfs);
  CHECK(runs.size() == 10);
  CHECK(SafetyMargin(runs, cs.cbfs) >= -1e-6);
}

TEST_CASE("nominal controller leaves the safe set") {
  const CaseStudy cs = Case2();
  Box bounds{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3)};
  const auto runs = BatchIntegrate(*cs.dynamics,
                                   ClippedAffineController(ThermalNominal(), bounds),
                                   ThermalStarts(cs), cs.horizon, cs.dt, cs.cbfs);
  CHECK(SafetyMargin(runs, cs.cbfs) < 0);
  bool clipped = false;
  for (const Trajectory& t : runs)
    for (const std::string& s : t.status) clipped |= s == "clipped";
  CHECK(clipped);
  for (const Trajectory& t : runs)
    for (const Eigen::VectorXd& u : t.inputs)
      CHECK(((u.array() >= -1e-12) && (u.array() <= 1 + 1e-12)).all());
}

TEST_CASE("QP filter keeps the rooms safe") {
  const CaseStudy cs = Case2();
  auto map = std::make_shared<const StackedMap>(cs.problem.map);
  auto u_set = std::make_shared<const InputSet>(cs.problem.input_set);
  const auto runs = BatchIntegrate(*cs.dynamics,
                                   QpFilterController(map, u_set, ThermalNominal()),
                                   ThermalStarts(cs), cs.horizon, cs.dt, cs.cbfs);
  CHECK(SafetyMargin(runs, cs.cbfs) >= -1e-6);
  for (const Trajectory& t : runs) {
    CHECK_FALSE(t.failed);
    for (const Eigen::VectorXd& u : t.inputs) CHECK(u_set->Contains(u, 1e-9));
  }
}

TEST_CASE("explicit controller tracks the online QP on the double integrator") {
  const CaseStudy cs = Case3();
  const Problem& p = cs.problem;
  auto map = std::make_shared<const StackedMap>(p.map);
  auto u_set = std::make_shared<const InputSet>(p.input_set);
  auto ec = std::make_shared<const ExplicitController>(
      PartitionHull(p.map, p.hull, p.input_set, p.u_des));
  const auto starts = RandomStates(p.hull, cs.trajectories, cs.seed);
  const auto runs = BatchIntegrate(
      *cs.dynamics,
      ExplicitFilterController(ec, map, u_set, p.u_des, ExplicitFallback::kOnlineQp),
      starts, cs.horizon, cs.dt, cs.cbfs);
  CHECK(SafetyMargin(runs, cs.cbfs) >= -1e-6);
  double dev = 0;
  for (const Trajectory& t : runs) {
    CHECK_FALSE(t.failed);
    for (size_t k = 0; k < t.inputs.size(); ++k) {
      const Eigen::VectorXd& x = t.states[k];
      const StackedValue v = p.map.Eval(x);
      const Eigen::VectorXd uq =
          SolveQpProjection(p.u_des(x), v.psi, v.delta, p.input_set).u;
      dev = std::max(dev, (uq - t.inputs[k]).norm());
      CHECK(p.input_set.Contains(t.inputs[k], 1e-9));
    }
  }
  CHECK(dev <= 1e-6);
}

TEST_CASE("controller failure ends the run with a flag") {
  const CaseStudy ex = Example1();
  auto map = std::make_shared<const StackedMap>(ex.problem.map);
  auto u_set = std::make_shared<const InputSet>(ex.problem.input_set);
  // x' = 1 drives the state into the incompatible middle of [0, 3].
  const Dynamics drift(1, 1, {QuadFunc::Constant(1, 1.0)}, {QuadFunc::Zero(1)});
  const Trajectory t = Integrate(drift, QpFilterController(map, u_set,
                                                           DesiredInput::Zero(1, 1)),
                                 V({0.5}), 3.0, 0.1);
  CHECK(t.failed);
  CHECK(t.failure_step > 0);
  CHECK_FALSE(t.failure.empty());
  CHECK(t.states.size() == static_cast<size_t>(t.failure_step) + 1);
}

TEST_CASE("SafetyMargin") {
  const CaseStudy cs = Case2();
  Trajectory pinned;
  pinned.times = {0.0};
  pinned.states = {V({25, 25, 25})};
  CHECK(SafetyMargin(pinned, cs.cbfs) == 0.0);
  pinned.states = {V({26, 29, 27})};
  CHECK(SafetyMargin(pinned, cs.cbfs) == doctest::Approx(1.0));
  CHECK_THROWS_AS(SafetyMargin(Trajectory{}, cs.cbfs), InvalidArgument);
}

TEST_CASE("batched integration is deterministic across thread counts") {
  const CaseStudy cs = Case2();
  const auto starts = ThermalStarts(cs);
  const Controller c = ConstantController(*cs.reference_witness);
  const auto a = BatchIntegrate(*cs.dynamics, c, starts, 5.0, cs.dt, cs.cbfs, true);
  const auto b = BatchIntegrate(*cs.dynamics, c, starts, 5.0, cs.dt, cs.cbfs, false);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i)
    CHECK(a[i].states.back() == b[i].states.back());
}

TEST_CASE("RandomStates") {
  const auto box = RandomStates(V({0, 10}), V({1, 20}), 100, 3);
  for (const Eigen::VectorXd& x : box) {
    CHECK(x(0) >= 0);
    CHECK(x(0) <= 1);
    CHECK(x(1) >= 10);
    CHECK(x(1) <= 20);
  }
  CHECK(RandomStates(V({0}), V({1}), 5, 9) == RandomStates(V({0}), V({1}), 5, 9));
}

TEST_CASE("trajectory CSV layout") {
  const CaseStudy cs = Case3();
  const Trajectory t = Integrate(*cs.dynamics, ConstantController(V({0})),
                                 V({0.1, 0.2}), 0.02, 0.01, cs.cbfs);
  const std::string csv = TrajectoryCsv(t);
  CHECK(csv.rfind("t,x1,x2,u1,h1,h2,status\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3);
}
