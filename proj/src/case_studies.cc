#include "cbfhull/case_studies.h"

#include "cbfhull/errors.h"

namespace cbfhull {

std::vector<Eigen::VectorXd> BoxCorners(const Eigen::VectorXd& lo,
                                        const Eigen::VectorXd& hi) {
  const int n = static_cast<int>(lo.size());
  std::vector<Eigen::VectorXd> out;
  for (int mask = 0; mask < (1 << n); ++mask) {
    Eigen::VectorXd v = lo;
    for (int k = 0; k < n; ++k)
      if (mask & (1 << k)) v(k) = hi(k);
    out.push_back(v);
  }
  return out;
}

DesiredInput ThermalNominal() {
  DesiredInput d;
  d.gain = Eigen::MatrixXd::Zero(3, 3);
  for (int i = 0; i < 3; ++i) {
    d.gain(i, (i + 1) % 3) += 0.05;
    d.gain(i, (i + 2) % 3) += 0.05;
    d.gain(i, i) += -0.1 - 0.05;
  }
  d.offset = Eigen::VectorXd::Constant(3, 0.05 * 25);
  return d;
}

CaseStudy Example1() {
  Eigen::MatrixXd q(1, 1);
  q << -1.0;
  std::vector<QuadFunc> psi = {
      QuadFunc(q, Eigen::VectorXd::Constant(1, 8.0), -16.0),
      QuadFunc::Constant(1, 1.0)};
  std::vector<QuadFunc> delta = {
      QuadFunc::Affine(Eigen::VectorXd::Constant(1, -1.0), 10.0),
      QuadFunc::Affine(Eigen::VectorXd::Constant(1, -1.0), 0.0)};
  CaseStudy cs{
      .name = "example1",
      .problem = Problem{
          StackedMap(1, 1, 2, std::move(psi), std::move(delta)),
          Hull({Eigen::VectorXd::Constant(1, 0.0),
                Eigen::VectorXd::Constant(1, 3.0)}),
          InputSet::FromBox(Eigen::VectorXd::Constant(1, 0.0),
                            Eigen::VectorXd::Constant(1, 10.0)),
          DesiredInput::Zero(1, 1),
          std::vector<Eigen::VectorXd>{Eigen::VectorXd::Constant(1, 0.5),
                                       Eigen::VectorXd::Constant(1, 3.0)}},
  };
  return cs;
}

namespace {

CaseStudy Thermal(const std::string& name, bool upper) {
  std::vector<AffineCbf> cbfs;
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(3, i);
    cbfs.push_back({e, -25.0, 1.0});
    if (upper) cbfs.push_back({-e, 30.0, 1.0});
  }
  Dynamics dyn = ThreeRoom();
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(3, 25.0);
  const Eigen::VectorXd hi = Eigen::VectorXd::Constant(3, 30.0);
  CaseStudy cs{
      .name = name,
      .problem = Problem{BuildFromDynamics(dyn, cbfs), Hull(BoxCorners(lo, hi)),
                         InputSet::FromBox(Eigen::VectorXd::Zero(3),
                                           Eigen::VectorXd::Ones(3)),
                         ThermalNominal(), std::nullopt},
      .cbfs = cbfs,
      .dynamics = dyn,
  };
  return cs;
}

}  // namespace

CaseStudy Case1() {
  CaseStudy cs = Thermal("case1", false);
  std::vector<Eigen::VectorXd> inputs(8, Eigen::VectorXd::Zero(3));
  inputs[0] = Eigen::VectorXd::Constant(3, 0.78);
  cs.problem.vertex_inputs = inputs;
  return cs;
}

CaseStudy Case2() {
  CaseStudy cs = Thermal("case2", true);
  cs.reference_witness = Eigen::VectorXd::Constant(3, 0.78);
  return cs;
}

CaseStudy Case3() {
  Eigen::MatrixXd a(2, 2), b(2, 1);
  a << 0, 1, 0.1, -0.1;
  b << 0, 1;
  const std::vector<AffineCbf> cbfs = {{Eigen::Vector2d(1, 1), 1.0, 1.0},
                                       {Eigen::Vector2d(-1, -1), 1.0, 1.0}};
  const InputSet u_set = InputSet::FromBox(Eigen::VectorXd::Constant(1, -1.0),
                                           Eigen::VectorXd::Constant(1, 1.0));
  std::vector<Eigen::VectorXd> verts = {
      Eigen::Vector2d(-1, 0), Eigen::Vector2d(-1, 1), Eigen::Vector2d(0, -1),
      Eigen::Vector2d(0, 1),  Eigen::Vector2d(1, 0),  Eigen::Vector2d(1, -1)};
  std::vector<Eigen::VectorXd> inputs;
  for (double u : {0.1, 0.0, 0.9, -0.9, -0.1, 0.0})
    inputs.push_back(Eigen::VectorXd::Constant(1, u));
  CaseStudy cs{
      .name = "case3",
      .problem = Problem{BuildFromLti(a, b, cbfs, u_set), Hull(verts), u_set,
                         DesiredInput::Zero(2, 1), inputs},
      .cbfs = cbfs,
      .dynamics = Dynamics::Lti(a, b),
      .horizon = 15.0,
  };
  return cs;
}

CaseStudy LoadCaseStudy(const std::string& name) {
  if (name == "example1") return Example1();
  if (name == "case1") return Case1();
  if (name == "case2") return Case2();
  if (name == "case3") return Case3();
  throw InvalidArgument("unknown case study '" + name +
                        "' (expected example1, case1, case2 or case3)");
}

}  // namespace cbfhull
