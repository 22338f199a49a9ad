#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cbfhull/curvature.h"
#include "cbfhull/problem_model.h"
#include "cbfhull/tolerances.h"

namespace cbfhull {

enum class CertificateKind {
  kEndpoint,
  kInterval,
  kCommon,
  kBlendJoint,
  kBlendPerVertex,
};

const char* ToString(CertificateKind k);
CertificateKind CertificateKindFromString(const std::string& s);

enum class FailureKind {
  kAssumption,         // A2 or A3 fails
  kInputSetNotBox,
  kSignCoherence,      // a column changes sign (Interval / Endpoint)
  kEmptyInterval,
  kEmptyCone,          // U intersected with S(Psi) is empty
  kVertexIncompatible,
  kNoCommonInput,      // LP margin < 0
  kPairwiseViolated,   // blend: no vertex family satisfies the pairwise rows
  kVertexInputsMissing,
  kWitnessRecheck,     // witness re-verification at vertices failed
};

const char* ToString(FailureKind k);

struct Diagnostic {
  CertificateKind certificate;
  FailureKind failure;
  std::string message;
};

struct VertexInput {
  Eigen::VectorXd u;
  double margin = 0.0;
};

// Per-vertex max-margin LPs. Throws VertexIncompatible for the first vertex
// whose best margin is negative.
std::vector<VertexInput> FindVertexInputs(const StackedMap& map,
                                          const Hull& hull,
                                          const InputSet& input_set,
                                          bool restrict_to_cone,
                                          const ToleranceConfig& tol = {});

// Minimum over vertices and rows of Psi(x^j) u + delta(x^j) with u free in the
// box [lo, hi] (exact, by interval arithmetic on each affine row).
double BoxVertexMargin(const StackedMap& map, const Hull& hull,
                       const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

struct IntervalCert {
  Eigen::VectorXd lo, hi;  // tilde I_k
  std::vector<std::vector<int>> positive, negative;  // P_k, N_k
  Eigen::VectorXd lower_bound, upper_bound;          // L_k, U_k
  bool vertex_inputs_feasible = true;
  double box_margin = 0.0;  // BoxVertexMargin over the certified box
};

struct EndpointCert {
  Eigen::VectorXd u;
  std::vector<ColumnSign> column_signs;
  double margin = 0.0;  // worst vertex margin of u
};

struct CommonCert {
  Eigen::VectorXd u;
  double margin = 0.0;  // t*
};

struct BlendCert {
  std::vector<Eigen::VectorXd> inputs;  // u^j
  std::vector<double> vertex_margins;
  double margin = 0.0;                  // t*
  double pairwise_violation = 0.0;
};

// Either a certificate or the diagnostics explaining why it does not apply.
template <typename Cert>
struct Attempt {
  std::optional<Cert> cert;
  std::vector<Diagnostic> diagnostics;
  double margin = 0.0;  // LP value when an LP was solved
  explicit operator bool() const { return cert.has_value(); }
};

Attempt<IntervalCert> CpcInterval(const StackedMap& map, const Hull& hull,
                                  const InputSet& box,
                                  const std::vector<Eigen::VectorXd>& inputs,
                                  const ToleranceConfig& tol = {});

Attempt<EndpointCert> EndpointRule(const StackedMap& map, const Hull& hull,
                                   const InputSet& box,
                                   const ToleranceConfig& tol = {});

Attempt<CommonCert> CpcCommon(const StackedMap& map, const Hull& hull,
                              const InputSet& input_set,
                              const ToleranceConfig& tol = {});

// max over ordered pairs (i, j) and rows of (Psi(x^i) - Psi(x^j))(u^i - u^j);
// 0 when fewer than two vertices.
double PairwiseCheck(const std::vector<Eigen::MatrixXd>& psi_at_vertices,
                     const std::vector<Eigen::VectorXd>& inputs);

Attempt<BlendCert> CpcBlendJoint(const StackedMap& map, const Hull& hull,
                                 const InputSet& input_set,
                                 const ToleranceConfig& tol = {});

// Per-vertex LPs followed by the pairwise check.
Attempt<BlendCert> CpcBlendPerVertex(const StackedMap& map, const Hull& hull,
                                     const InputSet& input_set,
                                     const ToleranceConfig& tol = {});

Eigen::VectorXd BlendInput(const BaryCoord& lambda,
                           const std::vector<Eigen::VectorXd>& inputs);

enum class OutcomeStatus { kEndpoint, kInterval, kCommon, kBlend, kInconclusive };

const char* ToString(OutcomeStatus s);

using Witness = std::variant<std::monostate, EndpointCert, IntervalCert,
                             CommonCert, BlendCert>;

struct CertificateOutcome {
  OutcomeStatus status = OutcomeStatus::kInconclusive;
  std::optional<CertificateKind> certificate;  // which one succeeded
  Witness witness;
  AssumptionReport assumptions;
  std::vector<Diagnostic> diagnostics;

  bool valid() const { return status != OutcomeStatus::kInconclusive; }
};

struct CascadePolicy {
  std::vector<CertificateKind> order = {
      CertificateKind::kEndpoint, CertificateKind::kInterval,
      CertificateKind::kCommon, CertificateKind::kBlendJoint};
  // Inputs for CPC-Interval; when absent the per-vertex LP inputs are used.
  std::optional<std::vector<Eigen::VectorXd>> vertex_inputs;

  // Parses "endpoint,interval,common,blend[,blend-pervertex]".
  static CascadePolicy Parse(const std::string& list);
};

CertificateOutcome Certify(const StackedMap& map, const Hull& hull,
                           const InputSet& input_set,
                           const CascadePolicy& policy = {},
                           const ToleranceConfig& tol = {});

}  // namespace cbfhull
