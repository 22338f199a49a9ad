#include "cbfhull/certificates.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cbfhull/errors.h"
#include "cbfhull/lp.h"

namespace cbfhull {

const char* ToString(CertificateKind k) {
  switch (k) {
    case CertificateKind::kEndpoint:
      return "endpoint";
    case CertificateKind::kInterval:
      return "interval";
    case CertificateKind::kCommon:
      return "common";
    case CertificateKind::kBlendJoint:
      return "blend";
    case CertificateKind::kBlendPerVertex:
      return "blend-pervertex";
  }
  return "?";
}

CertificateKind CertificateKindFromString(const std::string& s) {
  for (auto k : {CertificateKind::kEndpoint, CertificateKind::kInterval,
                 CertificateKind::kCommon, CertificateKind::kBlendJoint,
                 CertificateKind::kBlendPerVertex}) {
    if (s == ToString(k)) return k;
  }
  if (s == "blend-joint") return CertificateKind::kBlendJoint;
  throw InvalidArgument("unknown certificate '" + s + "'");
}

const char* ToString(FailureKind k) {
  switch (k) {
    case FailureKind::kAssumption:
      return "assumption";
    case FailureKind::kInputSetNotBox:
      return "input-set-not-box";
    case FailureKind::kSignCoherence:
      return "sign-coherence";
    case FailureKind::kEmptyInterval:
      return "empty-interval";
    case FailureKind::kEmptyCone:
      return "empty-cone";
    case FailureKind::kVertexIncompatible:
      return "vertex-incompatible";
    case FailureKind::kNoCommonInput:
      return "no-common-input";
    case FailureKind::kPairwiseViolated:
      return "pairwise-violated";
    case FailureKind::kVertexInputsMissing:
      return "vertex-inputs-missing";
    case FailureKind::kWitnessRecheck:
      return "witness-recheck";
  }
  return "?";
}

const char* ToString(OutcomeStatus s) {
  switch (s) {
    case OutcomeStatus::kEndpoint:
      return "endpoint";
    case OutcomeStatus::kInterval:
      return "interval";
    case OutcomeStatus::kCommon:
      return "common";
    case OutcomeStatus::kBlend:
      return "blend";
    case OutcomeStatus::kInconclusive:
      return "inconclusive";
  }
  return "?";
}

namespace {

std::string Num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Bounds of coordinate k of u from the box (if any) and the cone.
std::pair<double, double> InputBounds(const InputSet& u_set,
                                      const SignCone* cone, int k) {
  double lo = -kInf, hi = kInf;
  if (u_set.box()) {
    lo = u_set.box()->lower(k);
    hi = u_set.box()->upper(k);
  }
  if (cone != nullptr) return cone->Clip(k, lo, hi);
  return {lo, hi};
}

// Adds u in U (and in S(Psi) when cone is given) for the block at `offset`.
// Returns false if some bound interval is empty.
bool AddInputBlock(LpBuilder* lp, int offset, const InputSet& u_set,
                   const SignCone* cone) {
  const int m = u_set.m();
  bool ok = true;
  for (int k = 0; k < m; ++k) {
    const auto [lo, hi] = InputBounds(u_set, cone, k);
    if (lo > hi) ok = false;
    lp->SetBounds(offset + k, lo, hi);
  }
  if (u_set.polytope()) {
    const auto& poly = *u_set.polytope();
    for (Eigen::Index r = 0; r < poly.g.rows(); ++r) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(lp->num_vars());
      row.segment(offset, m) = poly.g.row(r);
      lp->AddLessEqual(row, poly.b(r));
    }
  }
  return ok;
}

// Psi(x) u + delta(x) >= t 1 for the u block at `offset`, t at `t_index`.
void AddMarginRows(LpBuilder* lp, int offset, int t_index,
                   const StackedValue& v) {
  const int m = static_cast<int>(v.psi.cols());
  for (Eigen::Index i = 0; i < v.psi.rows(); ++i) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(lp->num_vars());
    row.segment(offset, m) = -v.psi.row(i);
    row(t_index) = 1.0;
    lp->AddLessEqual(row, v.delta(i));
  }
}

double RowMargin(const StackedValue& v, const Eigen::VectorXd& u) {
  return (v.psi * u + v.delta).minCoeff();
}

// Best margin at one vertex; nullopt if U (and S) is empty.
std::optional<VertexInput> VertexLp(const StackedValue& v,
                                    const InputSet& u_set,
                                    const SignCone* cone,
                                    const ToleranceConfig& tol) {
  const int m = u_set.m();
  LpBuilder lp(m + 1);
  Eigen::VectorXd obj = Eigen::VectorXd::Zero(m + 1);
  obj(m) = 1.0;
  lp.SetObjective(obj);
  if (!AddInputBlock(&lp, 0, u_set, cone)) return std::nullopt;
  AddMarginRows(&lp, 0, m, v);
  const LpResult r = SolveLp(lp.Build(), tol);
  if (r.status != LpStatus::kOptimal) return std::nullopt;
  const Eigen::VectorXd u = r.z.head(m);
  return VertexInput{u, RowMargin(v, u)};
}

std::vector<StackedValue> VertexValues(const StackedMap& map,
                                       const Hull& hull) {
  std::vector<StackedValue> out;
  out.reserve(hull.size());
  for (const auto& x : hull.vertices()) out.push_back(map.Eval(x));
  return out;
}

template <typename Cert>
Attempt<Cert> Fail(CertificateKind kind, FailureKind failure,
                   std::string message) {
  Attempt<Cert> a;
  a.diagnostics.push_back({kind, failure, std::move(message)});
  return a;
}

// Shared A2/A3 gate.
std::optional<Diagnostic> AssumptionGate(const StackedMap& map,
                                         const Hull& hull,
                                         const InputSet& u_set,
                                         CertificateKind kind,
                                         const ToleranceConfig& tol) {
  const AssumptionReport r = ValidateProblem(map, hull, u_set, tol);
  if (!r.dims_ok)
    return Diagnostic{kind, FailureKind::kAssumption,
                      "problem dimensions are inconsistent"};
  if (!r.a2_ok)
    return Diagnostic{kind, FailureKind::kAssumption,
                      "A2 fails: some delta entry is not concave"};
  if (!r.a3_ok)
    return Diagnostic{kind, FailureKind::kAssumption,
                      "A3 fails: some Psi column is indefinite"};
  return std::nullopt;
}

}  // namespace

std::vector<VertexInput> FindVertexInputs(const StackedMap& map,
                                          const Hull& hull,
                                          const InputSet& input_set,
                                          bool restrict_to_cone,
                                          const ToleranceConfig& tol) {
  if (hull.size() < 1) throw InvalidArgument("FindVertexInputs: empty hull");
  std::optional<SignCone> cone;
  if (restrict_to_cone) cone = ComputeSignCone(map, tol.eig);
  const auto values = VertexValues(map, hull);
  const int nv = hull.size();
  std::vector<std::optional<VertexInput>> found(nv);
  std::vector<std::string> errors(nv);
#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < nv; ++j) {
    try {
      found[j] = VertexLp(values[j], input_set, cone ? &*cone : nullptr, tol);
    } catch (const std::exception& e) {
      errors[j] = e.what();
    }
  }
  std::vector<VertexInput> out;
  for (int j = 0; j < nv; ++j) {
    if (!errors[j].empty()) throw NumericalFailure(errors[j]);
    if (!found[j]) throw VertexIncompatible(j, -kInf);
    if (found[j]->margin < -tol.feas)
      throw VertexIncompatible(j, found[j]->margin);
    out.push_back(*found[j]);
  }
  return out;
}

double BoxVertexMargin(const StackedMap& map, const Hull& hull,
                       const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  double worst = kInf;
  for (const auto& x : hull.vertices()) {
    const StackedValue v = map.Eval(x);
    for (int i = 0; i < map.p(); ++i) {
      double val = v.delta(i);
      for (int k = 0; k < map.m(); ++k) {
        const double a = v.psi(i, k);
        val += std::min(a * lo(k), a * hi(k));
      }
      worst = std::min(worst, val);
    }
  }
  return worst;
}

Attempt<IntervalCert> CpcInterval(const StackedMap& map, const Hull& hull,
                                  const InputSet& box,
                                  const std::vector<Eigen::VectorXd>& inputs,
                                  const ToleranceConfig& tol) {
  constexpr auto kKind = CertificateKind::kInterval;
  if (!box.is_box())
    return Fail<IntervalCert>(kKind, FailureKind::kInputSetNotBox,
                              "CPC-Interval requires a box input set");
  if (auto d = AssumptionGate(map, hull, box, kKind, tol)) {
    Attempt<IntervalCert> a;
    a.diagnostics.push_back(*d);
    return a;
  }
  if (static_cast<int>(inputs.size()) != hull.size())
    return Fail<IntervalCert>(kKind, FailureKind::kVertexInputsMissing,
                              "expected one vertex input per hull vertex");
  for (const auto& u : inputs)
    if (u.size() != map.m())
      throw DimensionMismatch("CpcInterval: vertex input dimension");

  const SignCone cone = ComputeSignCone(map, tol.eig);
  const auto values = VertexValues(map, hull);
  const int m = map.m();
  IntervalCert cert;
  cert.positive.resize(m);
  cert.negative.resize(m);
  cert.lower_bound.resize(m);
  cert.upper_bound.resize(m);
  cert.lo.resize(m);
  cert.hi.resize(m);
  for (int k = 0; k < m; ++k) {
    double lk = -kInf, uk = kInf;
    for (int j = 0; j < hull.size(); ++j) {
      const Eigen::VectorXd col = values[j].psi.col(k);
      const bool pos = col.minCoeff() >= -tol.sign;
      const bool neg = col.maxCoeff() <= tol.sign;
      if (!pos && !neg) {
        return Fail<IntervalCert>(
            kKind, FailureKind::kSignCoherence,
            "column " + std::to_string(k + 1) +
                " of Psi is not sign-coherent at vertex " +
                std::to_string(j + 1) + " (mixed-sign entries)");
      }
      if (pos) {
        cert.positive[k].push_back(j);
        lk = std::max(lk, inputs[j](k));
      }
      if (neg) {
        cert.negative[k].push_back(j);
        uk = std::min(uk, inputs[j](k));
      }
    }
    cert.lower_bound(k) = lk;
    cert.upper_bound(k) = uk;
    const double lo = std::max(lk, box.box()->lower(k));
    const double hi = std::min(uk, box.box()->upper(k));
    const auto [clo, chi] = cone.Clip(k, lo, hi);
    if (clo > chi) {
      return Fail<IntervalCert>(kKind, FailureKind::kEmptyInterval,
                                "interval for input " + std::to_string(k + 1) +
                                    " is empty: [" + Num(clo) + ", " +
                                    Num(chi) + "]");
    }
    cert.lo(k) = clo;
    cert.hi(k) = chi;
  }

  Attempt<IntervalCert> out;
  for (int j = 0; j < hull.size(); ++j) {
    const double mj = RowMargin(values[j], inputs[j]);
    const bool in_u = box.Contains(inputs[j], tol.feas);
    if (mj < -tol.feas || !in_u) {
      cert.vertex_inputs_feasible = false;
      out.diagnostics.push_back(
          {kKind, FailureKind::kVertexIncompatible,
           "supplied input at vertex " + std::to_string(j + 1) +
               " is not vertex-feasible (margin " + Num(mj) +
               "); box checked directly at the vertices"});
    }
  }
  cert.box_margin = BoxVertexMargin(map, hull, cert.lo, cert.hi);
  if (cert.box_margin < -tol.feas) {
    out.diagnostics.push_back(
        {kKind, FailureKind::kWitnessRecheck,
         "certified box violates a vertex constraint (margin " +
             Num(cert.box_margin) + ")"});
    return out;
  }
  out.cert = std::move(cert);
  return out;
}

Attempt<EndpointCert> EndpointRule(const StackedMap& map, const Hull& hull,
                                   const InputSet& box,
                                   const ToleranceConfig& tol) {
  constexpr auto kKind = CertificateKind::kEndpoint;
  if (!box.is_box())
    return Fail<EndpointCert>(kKind, FailureKind::kInputSetNotBox,
                              "the Endpoint Rule requires a box input set");
  if (auto d = AssumptionGate(map, hull, box, kKind, tol)) {
    Attempt<EndpointCert> a;
    a.diagnostics.push_back(*d);
    return a;
  }
  const SignCone cone = ComputeSignCone(map, tol.eig);
  EndpointCert cert;
  cert.u.resize(map.m());
  for (int k = 0; k < map.m(); ++k) {
    const ColumnSign s = UniformColumnSign(map, hull, k, tol);
    cert.column_signs.push_back(s);
    if (s == ColumnSign::kInconclusive) {
      return Fail<EndpointCert>(kKind, FailureKind::kSignCoherence,
                                "column " + std::to_string(k + 1) +
                                    " of Psi has no uniform sign over the hull");
    }
    const auto [lo, hi] =
        cone.Clip(k, box.box()->lower(k), box.box()->upper(k));
    if (lo > hi) {
      return Fail<EndpointCert>(kKind, FailureKind::kEmptyInterval,
                                "E_" + std::to_string(k + 1) + " is empty");
    }
    cert.u(k) = s == ColumnSign::kNonneg ? hi : lo;
  }
  cert.margin = kInf;
  for (const auto& x : hull.vertices())
    cert.margin = std::min(cert.margin, RowMargin(map.Eval(x), cert.u));
  if (cert.margin < -tol.feas) {
    return Fail<EndpointCert>(
        kKind, FailureKind::kWitnessRecheck,
        "endpoint input violates a vertex constraint (margin " +
            Num(cert.margin) + ")");
  }
  Attempt<EndpointCert> out;
  out.margin = cert.margin;
  out.cert = std::move(cert);
  return out;
}

Attempt<CommonCert> CpcCommon(const StackedMap& map, const Hull& hull,
                              const InputSet& input_set,
                              const ToleranceConfig& tol) {
  constexpr auto kKind = CertificateKind::kCommon;
  if (auto d = AssumptionGate(map, hull, input_set, kKind, tol)) {
    Attempt<CommonCert> a;
    a.diagnostics.push_back(*d);
    return a;
  }
  const SignCone cone = ComputeSignCone(map, tol.eig);
  const int m = map.m();
  LpBuilder lp(m + 1);
  Eigen::VectorXd obj = Eigen::VectorXd::Zero(m + 1);
  obj(m) = 1.0;
  lp.SetObjective(obj);
  if (!AddInputBlock(&lp, 0, input_set, &cone))
    return Fail<CommonCert>(kKind, FailureKind::kEmptyCone,
                            "U intersected with S(Psi) is empty");
  for (const auto& v : VertexValues(map, hull)) AddMarginRows(&lp, 0, m, v);
  const LpResult r = SolveLp(lp.Build(), tol);
  if (r.status != LpStatus::kOptimal)
    return Fail<CommonCert>(kKind, FailureKind::kEmptyCone,
                            "U intersected with S(Psi) is empty");
  const double t = r.z(m);
  if (t < -tol.feas) {
    auto a = Fail<CommonCert>(
        kKind, FailureKind::kNoCommonInput,
        "vertex-feasible inputs share no common value: best common vertex "
        "margin t* = " +
            Num(t) + " < 0");
    a.margin = t;
    return a;
  }
  Attempt<CommonCert> out;
  out.margin = t;
  out.cert = CommonCert{r.z.head(m), t};
  return out;
}

double PairwiseCheck(const std::vector<Eigen::MatrixXd>& psi_at_vertices,
                     const std::vector<Eigen::VectorXd>& inputs) {
  if (psi_at_vertices.size() != inputs.size())
    throw DimensionMismatch("PairwiseCheck: list lengths differ");
  if (inputs.size() < 2) return 0.0;
  double worst = -kInf;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t j = i + 1; j < inputs.size(); ++j) {
      const Eigen::VectorXd v =
          (psi_at_vertices[i] - psi_at_vertices[j]) * (inputs[i] - inputs[j]);
      worst = std::max(worst, v.maxCoeff());
    }
  }
  return worst;
}

namespace {

std::vector<Eigen::MatrixXd> PsiAtVertices(const StackedMap& map,
                                           const Hull& hull) {
  std::vector<Eigen::MatrixXd> out;
  for (const auto& x : hull.vertices()) out.push_back(map.EvalPsi(x));
  return out;
}

}  // namespace

Attempt<BlendCert> CpcBlendJoint(const StackedMap& map, const Hull& hull,
                                 const InputSet& input_set,
                                 const ToleranceConfig& tol) {
  constexpr auto kKind = CertificateKind::kBlendJoint;
  if (auto d = AssumptionGate(map, hull, input_set, kKind, tol)) {
    Attempt<BlendCert> a;
    a.diagnostics.push_back(*d);
    return a;
  }
  const SignCone cone = ComputeSignCone(map, tol.eig);
  const int m = map.m();
  const int nv = hull.size();
  const int t_index = nv * m;
  LpBuilder lp(nv * m + 1);
  Eigen::VectorXd obj = Eigen::VectorXd::Zero(nv * m + 1);
  obj(t_index) = 1.0;
  lp.SetObjective(obj);
  const auto values = VertexValues(map, hull);
  for (int j = 0; j < nv; ++j) {
    if (!AddInputBlock(&lp, j * m, input_set, &cone))
      return Fail<BlendCert>(kKind, FailureKind::kEmptyCone,
                             "U intersected with S(Psi) is empty");
    AddMarginRows(&lp, j * m, t_index, values[j]);
  }
  for (int i = 0; i < nv; ++i) {
    for (int j = i + 1; j < nv; ++j) {
      const Eigen::MatrixXd diff = values[i].psi - values[j].psi;
      for (int r = 0; r < map.p(); ++r) {
        if (diff.row(r).cwiseAbs().maxCoeff() == 0.0) continue;  // 0 <= 0
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nv * m + 1);
        row.segment(i * m, m) = diff.row(r);
        row.segment(j * m, m) = -diff.row(r);
        lp.AddLessEqual(row, 0.0);
      }
    }
  }
  const LpResult r = SolveLp(lp.Build(), tol);

  auto explain = [&](const std::string& head) {
    // Separate vertex incompatibility from the pairwise obstruction.
    std::string msg = head;
    FailureKind kind = FailureKind::kPairwiseViolated;
    try {
      const auto vi = FindVertexInputs(map, hull, input_set, true, tol);
      std::vector<Eigen::VectorXd> us;
      for (const auto& v : vi) us.push_back(v.u);
      msg += ": no vertex-feasible inputs satisfy the pairwise condition "
             "(per-vertex max-margin inputs violate it by " +
             Num(PairwiseCheck(PsiAtVertices(map, hull), us)) + ")";
    } catch (const VertexIncompatible& e) {
      kind = FailureKind::kVertexIncompatible;
      msg += ": " + std::string(e.what());
    }
    return Fail<BlendCert>(kKind, kind, msg);
  };

  if (r.status != LpStatus::kOptimal) return explain("joint LP infeasible");
  const double t = r.z(t_index);
  if (t < -tol.feas) {
    auto a = explain("joint LP margin t* = " + Num(t) + " < 0");
    a.margin = t;
    return a;
  }
  BlendCert cert;
  cert.margin = t;
  for (int j = 0; j < nv; ++j) {
    cert.inputs.push_back(r.z.segment(j * m, m));
    cert.vertex_margins.push_back(RowMargin(values[j], cert.inputs.back()));
  }
  cert.pairwise_violation = PairwiseCheck(PsiAtVertices(map, hull), cert.inputs);
  Attempt<BlendCert> out;
  out.margin = t;
  out.cert = std::move(cert);
  return out;
}

Attempt<BlendCert> CpcBlendPerVertex(const StackedMap& map, const Hull& hull,
                                     const InputSet& input_set,
                                     const ToleranceConfig& tol) {
  constexpr auto kKind = CertificateKind::kBlendPerVertex;
  if (auto d = AssumptionGate(map, hull, input_set, kKind, tol)) {
    Attempt<BlendCert> a;
    a.diagnostics.push_back(*d);
    return a;
  }
  std::vector<VertexInput> vi;
  try {
    vi = FindVertexInputs(map, hull, input_set, true, tol);
  } catch (const VertexIncompatible& e) {
    return Fail<BlendCert>(kKind, FailureKind::kVertexIncompatible, e.what());
  }
  BlendCert cert;
  cert.margin = kInf;
  for (const auto& v : vi) {
    cert.inputs.push_back(v.u);
    cert.vertex_margins.push_back(v.margin);
    cert.margin = std::min(cert.margin, v.margin);
  }
  cert.pairwise_violation = PairwiseCheck(PsiAtVertices(map, hull), cert.inputs);
  if (cert.pairwise_violation > tol.pairwise) {
    auto a = Fail<BlendCert>(kKind, FailureKind::kPairwiseViolated,
                             "per-vertex inputs violate the pairwise "
                             "condition by " +
                                 Num(cert.pairwise_violation));
    a.margin = cert.margin;
    return a;
  }
  Attempt<BlendCert> out;
  out.margin = cert.margin;
  out.cert = std::move(cert);
  return out;
}

Eigen::VectorXd BlendInput(const BaryCoord& lambda,
                           const std::vector<Eigen::VectorXd>& inputs) {
  const auto& l = lambda.lambda();
  if (l.size() != static_cast<Eigen::Index>(inputs.size()) || inputs.empty())
    throw DimensionMismatch("BlendInput: one weight per vertex input");
  Eigen::VectorXd u = Eigen::VectorXd::Zero(inputs.front().size());
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    if (inputs[j].size() != u.size())
      throw DimensionMismatch("BlendInput: input dimensions differ");
    u += l(j) * inputs[j];
  }
  return u;
}

CascadePolicy CascadePolicy::Parse(const std::string& list) {
  CascadePolicy p;
  p.order.clear();
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    p.order.push_back(CertificateKindFromString(item));
  }
  if (p.order.empty()) throw InvalidArgument("empty cascade policy");
  return p;
}

CertificateOutcome Certify(const StackedMap& map, const Hull& hull,
                           const InputSet& input_set,
                           const CascadePolicy& policy,
                           const ToleranceConfig& tol) {
  CertificateOutcome out;
  out.assumptions = ValidateProblem(map, hull, input_set, tol);
  auto absorb = [&](auto& attempt) {
    out.diagnostics.insert(out.diagnostics.end(), attempt.diagnostics.begin(),
                           attempt.diagnostics.end());
  };
  for (CertificateKind kind : policy.order) {
    switch (kind) {
      case CertificateKind::kEndpoint: {
        auto a = EndpointRule(map, hull, input_set, tol);
        absorb(a);
        if (a) {
          out.status = OutcomeStatus::kEndpoint;
          out.witness = std::move(*a.cert);
        }
        break;
      }
      case CertificateKind::kInterval: {
        std::vector<Eigen::VectorXd> inputs;
        if (policy.vertex_inputs) {
          inputs = *policy.vertex_inputs;
        } else if (input_set.is_box() && out.assumptions.a2_ok &&
                   out.assumptions.a3_ok) {
          try {
            for (const auto& v :
                 FindVertexInputs(map, hull, input_set, false, tol))
              inputs.push_back(v.u);
          } catch (const VertexIncompatible& e) {
            out.diagnostics.push_back({kind, FailureKind::kVertexIncompatible,
                                       e.what()});
            break;
          }
        }
        auto a = CpcInterval(map, hull, input_set, inputs, tol);
        absorb(a);
        if (a) {
          out.status = OutcomeStatus::kInterval;
          out.witness = std::move(*a.cert);
        }
        break;
      }
      case CertificateKind::kCommon: {
        auto a = CpcCommon(map, hull, input_set, tol);
        absorb(a);
        if (a) {
          out.status = OutcomeStatus::kCommon;
          out.witness = std::move(*a.cert);
        }
        break;
      }
      case CertificateKind::kBlendJoint:
      case CertificateKind::kBlendPerVertex: {
        auto a = kind == CertificateKind::kBlendJoint
                     ? CpcBlendJoint(map, hull, input_set, tol)
                     : CpcBlendPerVertex(map, hull, input_set, tol);
        absorb(a);
        if (a) {
          out.status = OutcomeStatus::kBlend;
          out.witness = std::move(*a.cert);
        }
        break;
      }
    }
    if (out.valid()) {
      out.certificate = kind;
      break;
    }
  }
  return out;
}

}  // namespace cbfhull
