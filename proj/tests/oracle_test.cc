#include <random>

#include <doctest.h>

#include "cbfhull/case_studies.h"
#include "cbfhull/certificates.h"
#include "cbfhull/lp.h"
#include "cbfhull/oracle.h"

using namespace cbfhull;

namespace {

Eigen::VectorXd V(std::initializer_list<double> v) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

}  // namespace

TEST_CASE("PointwiseMargin examples") {
  const Problem ex = Example1().problem;
  // Equalize -6.25u + 8.5 = u - 1.5: u = 10/7.25, t = u - 1.5.
  const PointMargin m = PointwiseMargin(ex.map, V({1.5}), ex.input_set);
  CHECK(m.u(0) == doctest::Approx(10 / 7.25).epsilon(1e-10));
  CHECK(m.t == doctest::Approx(10 / 7.25 - 1.5).epsilon(1e-10));
  CHECK(m.t == doctest::Approx(-0.12069).epsilon(1e-4));

  const Problem c3 = Case3().problem;
  const PointMargin m3 = PointwiseMargin(c3.map, V({0, 1}), c3.input_set);
  CHECK(m3.t == doctest::Approx(0.1));
  CHECK(m3.u(0) == doctest::Approx(-1.0));

  StackedMap flat(1, 2, 3, std::vector<QuadFunc>(6, QuadFunc::Zero(1)),
                  std::vector<QuadFunc>(3, QuadFunc::Constant(1, 1.0)));
  CHECK(PointwiseMargin(flat, V({4}), InputSet::FromBox(V({0, 0}), V({1, 1}))).t ==
        doctest::Approx(1.0));
}

TEST_CASE("GridScan examples") {
  const Problem ex = Example1().problem;
  ScanOptions opt;
  opt.per_edge = 61;
  const ScanReport r = GridScan(ex.map, ex.hull, ex.input_set, opt);
  CHECK(r.samples == 61);
  CHECK(r.mode == "grid");
  CHECK(r.min_margin <= -0.12);
  CHECK(std::abs(r.argmin(0) - 1.5) <= 0.05 + 1e-12);

  const Problem c2 = Case2().problem;
  const ScanReport r2 = GridScan(c2.map, c2.hull, c2.input_set);
  CHECK(r2.samples == 1331);
  CHECK(r2.min_margin >= -1e-8);

  const Hull one({V({25, 25, 25})});
  const ScanReport r1 = GridScan(c2.map, one, c2.input_set);
  CHECK(r1.samples == 1);
  CHECK(r1.min_margin ==
        doctest::Approx(PointwiseMargin(c2.map, one.vertex(0), c2.input_set).t));
}

TEST_CASE("scan report keeps samples on request and its minimum is attained") {
  const Problem c3 = Case3().problem;
  ScanOptions opt;
  opt.keep_samples = true;
  const ScanReport r = GridScan(c3.map, c3.hull, c3.input_set, opt);
  REQUIRE(r.margins.size() == static_cast<size_t>(r.samples));
  REQUIRE(r.sample_points.size() == r.margins.size());
  double lo = kInf;
  for (size_t i = 0; i < r.margins.size(); ++i) lo = std::min(lo, r.margins[i]);
  CHECK(lo == r.min_margin);
  CHECK(PointwiseMargin(c3.map, r.argmin, c3.input_set).t ==
        doctest::Approx(r.min_margin));
}

TEST_CASE("random mode for large vertex sets") {
  std::vector<Eigen::VectorXd> verts;
  for (int j = 0; j < 12; ++j) {
    const double a = 2 * 3.14159265358979 * j / 12;
    verts.push_back(V({0.8 * std::cos(a), 0.8 * std::sin(a)}));
  }
  const Problem c3 = Case3().problem;
  ScanOptions opt;
  opt.random_samples = 500;
  const ScanReport r = GridScan(c3.map, Hull(verts), c3.input_set, opt);
  CHECK(r.mode == "random");
  CHECK(r.samples == 500);
}

TEST_CASE("margin is invariant under row permutation") {
  std::mt19937_64 rng(8);
  for (const CaseStudy& cs : {Example1(), Case2(), Case3()}) {
    std::vector<int> perm(cs.problem.map.p());
    for (int i = 0; i < cs.problem.map.p(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    const StackedMap shuffled = cs.problem.map.PermuteRows(perm);
    const auto samples = ScanSamples(cs.problem.hull, ScanOptions{});
    for (size_t s = 0; s < samples.size(); s += 7) {
      const double a =
          PointwiseMargin(cs.problem.map, samples[s].x, cs.problem.input_set).t;
      const double b =
          PointwiseMargin(shuffled, samples[s].x, cs.problem.input_set).t;
      CHECK(std::abs(a - b) <= 1e-10);
    }
  }
}

TEST_CASE("parallel scan equals the serial reference") {
  for (const CaseStudy& cs : {Example1(), Case2(), Case3()}) {
    const ScanReport a = GridScan(cs.problem.map, cs.problem.hull,
                                  cs.problem.input_set);
    const ScanReport b = GridScanReference(cs.problem.map, cs.problem.hull,
                                           cs.problem.input_set);
    CHECK(a.samples == b.samples);
    CHECK(a.min_margin == b.min_margin);
    CHECK(a.argmin.isApprox(b.argmin));
  }
}

TEST_CASE("CheckCertificate") {
  SUBCASE("common witness passes on every sample") {
    const Problem c2 = Case2().problem;
    CertificateOutcome out = Certify(c2.map, c2.hull, c2.input_set);
    REQUIRE(out.status == OutcomeStatus::kCommon);
    const CertificateCheck chk = CheckCertificate(out, c2.map, c2.hull, c2.input_set);
    CHECK(chk.pass);
    CHECK(chk.samples == 1331);
    CHECK(chk.min_residual >= -1e-8);
  }
  SUBCASE("blend witness passes") {
    const Problem c3 = Case3().problem;
    CertificateOutcome out = Certify(c3.map, c3.hull, c3.input_set);
    REQUIRE(out.status == OutcomeStatus::kBlend);
    CHECK(CheckCertificate(out, c3.map, c3.hull, c3.input_set).pass);
  }
  SUBCASE("interval box passes at all corners") {
    const Problem c1 = Case1().problem;
    CascadePolicy policy;
    policy.order = {CertificateKind::kInterval};
    policy.vertex_inputs = c1.vertex_inputs;
    CertificateOutcome out = Certify(c1.map, c1.hull, c1.input_set, policy);
    REQUIRE(out.status == OutcomeStatus::kInterval);
    const CertificateCheck chk = CheckCertificate(out, c1.map, c1.hull, c1.input_set);
    CHECK(chk.pass);
    CHECK(chk.inputs_tested == 1331 * 8);
  }
  SUBCASE("corrupted witness fails at a located sample") {
    const Problem c2 = Case2().problem;
    CertificateOutcome out = Certify(c2.map, c2.hull, c2.input_set);
    auto& cert = std::get<CommonCert>(out.witness);
    cert.u.array() -= 1.0;
    const CertificateCheck chk = CheckCertificate(out, c2.map, c2.hull, c2.input_set);
    CHECK_FALSE(chk.pass);
    CHECK(chk.min_residual < -1e-8);
    CHECK(chk.worst_x.size() == 3);
    CHECK_FALSE(chk.message.empty());
  }
  SUBCASE("inconclusive outcomes have nothing to replay") {
    const Problem ex = Example1().problem;
    CertificateOutcome out = Certify(ex.map, ex.hull, ex.input_set);
    CHECK_FALSE(CheckCertificate(out, ex.map, ex.hull, ex.input_set).pass);
  }
}
