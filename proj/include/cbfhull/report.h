#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbfhull/certificates.h"
#include "cbfhull/explicit_filter.h"
#include "cbfhull/oracle.h"
#include "cbfhull/sim.h"
#include "cbfhull/tolerances.h"

namespace cbfhull {

using ordered_json = nlohmann::ordered_json;

ordered_json ToJson(const Eigen::VectorXd& v);
ordered_json ToJson(const Eigen::MatrixXd& m);
ordered_json ToJson(const ToleranceConfig& tol);
ordered_json ToJson(const AssumptionReport& r);
ordered_json ToJson(const CertificateOutcome& outcome);
ordered_json ToJson(const ScanReport& report);
ordered_json ToJson(const CertificateCheck& check);
ordered_json ToJson(const ExplicitController& controller);

ExplicitController ControllerFromJson(const nlohmann::json& j);

// Report document: a "generated" timestamp on its own line, then the kind,
// the problem hash and the tolerances, then `body`. Everything except the
// timestamp line is a pure function of the inputs.
std::string RenderReport(const std::string& kind, const std::string& problem_hash,
                         const ToleranceConfig& tol, const ordered_json& body);

// Drops the timestamp line; used to compare reports.
std::string StripTimestamp(const std::string& report);

// Per-sample CSV: lambda_1..lambda_N, x_1..x_n, margin.
std::string ScanCsv(const ScanReport& report);

void WriteFile(const std::string& path, const std::string& content);

struct SimulationSet {
  std::string controller;
  std::vector<Trajectory> runs;
  double safety_margin = 0.0;
  int failures = 0;
  int fallback_steps = 0;
  double max_qp_deviation = -1.0;  // explicit runs only
};

struct BundleSummary {
  std::string name;
  CertificateOutcome outcome;
  ScanReport scan;
  std::vector<SimulationSet> simulations;
  int regions = 0;
  std::vector<std::string> files;
};

struct BundleOptions {
  int per_edge = 11;
  std::uint64_t seed = 20240601;
  bool write_files = true;
  ToleranceConfig tol;
};

// Full pipeline for one built-in case study; files go under out_dir.
BundleSummary RunCaseStudy(const std::string& name, const std::string& out_dir,
                           const BundleOptions& options = {});

}  // namespace cbfhull
