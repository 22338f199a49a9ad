#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cbfhull/certificates.h"
#include "cbfhull/geometry.h"
#include "cbfhull/problem_model.h"
#include "cbfhull/tolerances.h"

namespace cbfhull {

struct PointMargin {
  double t = 0.0;  // -inf if U is empty
  Eigen::VectorXd u;
};

// t*(x) = max { t : Psi(x) u + delta(x) >= t 1, u in U }.
PointMargin PointwiseMargin(const StackedMap& map, const Eigen::VectorXd& x,
                            const InputSet& input_set,
                            const ToleranceConfig& tol = {});

enum class ScanMode { kAuto, kGrid, kRandom };

struct ScanOptions {
  int per_edge = 11;
  ScanMode mode = ScanMode::kAuto;  // grid for N <= 8, random otherwise
  int random_samples = 20000;
  std::uint64_t seed = 1;
  bool keep_samples = false;
  bool parallel = true;
};

struct ScanReport {
  int samples = 0;
  double min_margin = kInfMargin();
  Eigen::VectorXd argmin;
  Eigen::VectorXd argmin_lambda;
  std::string mode;  // "grid" or "random"
  int per_edge = 0;
  std::uint64_t seed = 0;
  std::vector<geometry::HullSample> sample_points;  // when keep_samples
  std::vector<double> margins;                      // when keep_samples

  static constexpr double kInfMargin() { return 1e300; }
};

// Hull samples used by the scans.
std::vector<geometry::HullSample> ScanSamples(const Hull& hull,
                                              const ScanOptions& options);

ScanReport GridScan(const StackedMap& map, const Hull& hull,
                    const InputSet& input_set, const ScanOptions& options = {},
                    const ToleranceConfig& tol = {});

// Single-threaded reference for GridScan.
ScanReport GridScanReference(const StackedMap& map, const Hull& hull,
                             const InputSet& input_set,
                             const ScanOptions& options = {},
                             const ToleranceConfig& tol = {});

struct CertificateCheck {
  bool pass = true;
  int samples = 0;
  int inputs_tested = 0;
  double min_residual = ScanReport::kInfMargin();
  Eigen::VectorXd worst_x;
  Eigen::VectorXd worst_u;
  std::string message;
};

// Replays the witness of a valid outcome at every scan sample: all corners of
// an interval box, the endpoint or common input, or the blended input u_lambda.
// Fails on any residual below -1e-8 or an input outside U.
CertificateCheck CheckCertificate(const CertificateOutcome& outcome,
                                  const StackedMap& map, const Hull& hull,
                                  const InputSet& input_set,
                                  const ScanOptions& options = {},
                                  double fail_tol = 1e-8);

}  // namespace cbfhull
