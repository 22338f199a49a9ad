#include "cbfhull/oracle.h"

#include <algorithm>
#include <cmath>

#include "cbfhull/errors.h"
#include "cbfhull/lp.h"

namespace cbfhull {

PointMargin PointwiseMargin(const StackedMap& map, const Eigen::VectorXd& x,
                            const InputSet& input_set,
                            const ToleranceConfig& tol) {
  const StackedValue v = map.Eval(x);
  const int m = map.m();
  LpBuilder lp(m + 1);
  Eigen::VectorXd obj = Eigen::VectorXd::Zero(m + 1);
  obj(m) = 1.0;
  lp.SetObjective(obj);
  for (int i = 0; i < input_set.num_rows(); ++i) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(m + 1);
    row.head(m) = input_set.G().row(i);
    lp.AddLessEqual(row, input_set.b()(i));
  }
  for (int i = 0; i < map.p(); ++i) {
    Eigen::RowVectorXd row(m + 1);
    row.head(m) = -v.psi.row(i);
    row(m) = 1.0;
    lp.AddLessEqual(row, v.delta(i));
  }
  const LpResult r = SolveLp(lp.Build(), tol);
  PointMargin out;
  if (r.status != LpStatus::kOptimal) {
    out.t = -kInf;
    out.u = Eigen::VectorXd::Zero(m);
    return out;
  }
  out.u = r.z.head(m);
  // Report the exact margin of the returned input.
  out.t = (v.psi * out.u + v.delta).minCoeff();
  return out;
}

std::vector<geometry::HullSample> ScanSamples(const Hull& hull,
                                              const ScanOptions& options) {
  if (options.per_edge < 2 && options.mode != ScanMode::kRandom)
    throw InvalidArgument("scan resolution must be at least 2 per edge");
  const bool grid = options.mode == ScanMode::kGrid ||
                    (options.mode == ScanMode::kAuto && hull.size() <= 8);
  if (grid) return geometry::BarycentricGrid(hull, options.per_edge);
  return geometry::RandomHullSamples(hull, options.random_samples,
                                     options.seed);
}

namespace {

ScanReport Scan(const StackedMap& map, const Hull& hull,
                const InputSet& input_set, const ScanOptions& options,
                const ToleranceConfig& tol, bool parallel) {
  auto samples = ScanSamples(hull, options);
  const int ns = static_cast<int>(samples.size());
  std::vector<double> margins(ns);
#pragma omp parallel for schedule(static) if (parallel)
  for (int s = 0; s < ns; ++s)
    margins[s] = PointwiseMargin(map, samples[s].x, input_set, tol).t;

  ScanReport rep;
  rep.samples = ns;
  rep.per_edge = options.per_edge;
  rep.seed = options.seed;
  rep.mode = (options.mode == ScanMode::kGrid ||
              (options.mode == ScanMode::kAuto && hull.size() <= 8))
                 ? "grid"
                 : "random";
  for (int s = 0; s < ns; ++s) {
    if (margins[s] < rep.min_margin) {
      rep.min_margin = margins[s];
      rep.argmin = samples[s].x;
      rep.argmin_lambda = samples[s].lambda;
    }
  }
  if (options.keep_samples) {
    rep.sample_points = std::move(samples);
    rep.margins = std::move(margins);
  }
  return rep;
}

}  // namespace

ScanReport GridScan(const StackedMap& map, const Hull& hull,
                    const InputSet& input_set, const ScanOptions& options,
                    const ToleranceConfig& tol) {
  return Scan(map, hull, input_set, options, tol, options.parallel);
}

ScanReport GridScanReference(const StackedMap& map, const Hull& hull,
                             const InputSet& input_set,
                             const ScanOptions& options,
                             const ToleranceConfig& tol) {
  return Scan(map, hull, input_set, options, tol, false);
}

namespace {

// All corners of the box [lo, hi] (coordinates with lo == hi collapse).
std::vector<Eigen::VectorXd> Corners(const Eigen::VectorXd& lo,
                                     const Eigen::VectorXd& hi) {
  std::vector<Eigen::VectorXd> out{lo};
  for (int k = 0; k < lo.size(); ++k) {
    if (hi(k) == lo(k)) continue;
    const std::size_t count = out.size();
    for (std::size_t i = 0; i < count; ++i) {
      Eigen::VectorXd c = out[i];
      c(k) = hi(k);
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

CertificateCheck CheckCertificate(const CertificateOutcome& outcome,
                                  const StackedMap& map, const Hull& hull,
                                  const InputSet& input_set,
                                  const ScanOptions& options,
                                  double fail_tol) {
  CertificateCheck check;
  if (!outcome.valid()) {
    check.pass = false;
    check.message = "outcome is not a valid certificate";
    return check;
  }
  const auto samples = ScanSamples(hull, options);
  check.samples = static_cast<int>(samples.size());

  std::vector<Eigen::VectorXd> fixed;
  const BlendCert* blend = nullptr;
  if (const auto* e = std::get_if<EndpointCert>(&outcome.witness)) {
    fixed.push_back(e->u);
  } else if (const auto* c = std::get_if<CommonCert>(&outcome.witness)) {
    fixed.push_back(c->u);
  } else if (const auto* iv = std::get_if<IntervalCert>(&outcome.witness)) {
    fixed = Corners(iv->lo, iv->hi);
  } else {
    blend = std::get_if<BlendCert>(&outcome.witness);
  }
  if (blend == nullptr && fixed.empty()) {
    check.pass = false;
    check.message = "outcome carries no witness";
    return check;
  }
  bool outside = false;
  for (const auto& u : fixed)
    if (!input_set.Contains(u, fail_tol)) outside = true;

  auto record = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                    const StackedValue& v) {
    ++check.inputs_tested;
    const double r = (v.psi * u + v.delta).minCoeff();
    if (r < check.min_residual) {
      check.min_residual = r;
      check.worst_x = x;
      check.worst_u = u;
    }
  };
  for (const auto& s : samples) {
    const StackedValue v = map.Eval(s.x);
    if (blend != nullptr) {
      const Eigen::VectorXd u = BlendInput(BaryCoord(s.lambda), blend->inputs);
      if (!input_set.Contains(u, fail_tol)) {
        check.pass = false;
        check.worst_x = s.x;
        check.worst_u = u;
        check.message = "blended input lies outside U";
        return check;
      }
      record(s.x, u, v);
    } else {
      for (const auto& u : fixed) record(s.x, u, v);
    }
  }
  if (check.min_residual < -fail_tol) {
    check.pass = false;
    check.message = "witness violates a constraint at a sample point";
  }
  // Residuals are still scanned so the worst sample is reported.
  if (outside) {
    check.pass = false;
    check.message = check.message.empty()
                        ? "witness input lies outside U"
                        : "witness input lies outside U; " + check.message;
  }
  return check;
}

}  // namespace cbfhull
