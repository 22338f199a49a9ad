// cbfhull: certify, synthesize, scan and simulate CBF problems on hulls.
//
// Exit codes: 0 certified / success, 1 usage or input error, 2 inconclusive,
// 3 falsified (oracle margin or simulated safety margin below tolerance).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cbfhull/case_studies.h"
#include "cbfhull/certificates.h"
#include "cbfhull/controllers.h"
#include "cbfhull/errors.h"
#include "cbfhull/explicit_filter.h"
#include "cbfhull/oracle.h"
#include "cbfhull/problem_io.h"
#include "cbfhull/report.h"
#include "cbfhull/sim.h"

namespace {

using namespace cbfhull;

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kInconclusive = 2;
constexpr int kFalsified = 3;

struct RunConfig {
  std::string problem;
  std::optional<double> tol_feas;
  std::optional<double> tol_active;
  std::optional<int> grid;
  std::string cascade;
  std::string out;
  std::uint64_t seed = 20240601;
  std::string format = "json";
  std::string controller = "qp";
  std::string demo;

  ToleranceConfig Tolerances() const {
    ToleranceConfig t;
    if (tol_feas) t.feas = *tol_feas;
    if (tol_active) t.active = *tol_active;
    return t;
  }
};

void Emit(const RunConfig& cfg, const std::string& content) {
  if (cfg.out.empty() || cfg.out == "-") {
    std::cout << content;
  } else {
    WriteFile(cfg.out, content);
  }
}

int Certify(const RunConfig& cfg) {
  const ProblemFile pf = LoadProblemFile(cfg.problem);
  const Problem& p = pf.problem;
  const ToleranceConfig tol = cfg.Tolerances();
  CascadePolicy policy =
      cfg.cascade.empty() ? CascadePolicy{} : CascadePolicy::Parse(cfg.cascade);
  policy.vertex_inputs = p.vertex_inputs;
  const CertificateOutcome o = Certify(p.map, p.hull, p.input_set, policy, tol);
  if (cfg.format == "csv") {
    std::string csv = "certificate,failure,message\n";
    for (const auto& d : o.diagnostics)
      csv += std::string(ToString(d.certificate)) + "," + ToString(d.failure) +
             ",\"" + d.message + "\"\n";
    csv += std::string("result,") + ToString(o.status) + ",\n";
    Emit(cfg, csv);
  } else {
    Emit(cfg, RenderReport("certificate", pf.content_hash, tol, ToJson(o)));
  }
  std::cerr << "status: " << ToString(o.status) << "\n";
  return o.valid() ? kOk : kInconclusive;
}

int Explicit(const RunConfig& cfg) {
  const ProblemFile pf = LoadProblemFile(cfg.problem);
  const Problem& p = pf.problem;
  const ToleranceConfig tol = cfg.Tolerances();
  PartitionOptions opts;
  if (cfg.grid) opts.seed_per_edge = *cfg.grid;
  const ExplicitController c =
      PartitionHull(p.map, p.hull, p.input_set, p.u_des, opts, tol);
  Emit(cfg, RenderReport("explicit_controller", pf.content_hash, tol, ToJson(c)));
  std::cerr << "regions: " << c.regions().size() << "\n";
  return kOk;
}

int Oracle(const RunConfig& cfg) {
  const ProblemFile pf = LoadProblemFile(cfg.problem);
  const Problem& p = pf.problem;
  const ToleranceConfig tol = cfg.Tolerances();
  ScanOptions so;
  if (cfg.grid) so.per_edge = *cfg.grid;
  so.seed = cfg.seed;
  so.keep_samples = cfg.format == "csv";
  const ScanReport r = GridScan(p.map, p.hull, p.input_set, so, tol);
  if (cfg.format == "csv") {
    Emit(cfg, ScanCsv(r));
  } else {
    Emit(cfg, RenderReport("scan", pf.content_hash, tol, ToJson(r)));
  }
  std::cerr << "min margin: " << r.min_margin << "\n";
  return r.min_margin < -tol.feas ? kFalsified : kOk;
}

int Simulate(const RunConfig& cfg) {
  const ProblemFile pf = LoadProblemFile(cfg.problem);
  if (!pf.sim) throw ParseError("field 'sim': missing (needed by simulate)");
  const Problem& p = pf.problem;
  const SimSpec& sim = *pf.sim;
  const ToleranceConfig tol = cfg.Tolerances();
  const auto map = std::make_shared<const StackedMap>(p.map);
  const auto u_set = std::make_shared<const InputSet>(p.input_set);

  Controller ctrl;
  if (cfg.controller == "qp") {
    ctrl = QpFilterController(map, u_set, p.u_des, tol);
  } else if (cfg.controller == "constant") {
    if (!sim.constant_input)
      throw ParseError("field 'sim.constant_input': missing");
    ctrl = ConstantController(*sim.constant_input);
  } else if (cfg.controller == "nominal") {
    if (!p.input_set.box())
      throw InvalidArgument("nominal controller needs a box input set");
    ctrl = ClippedAffineController(p.u_des, *p.input_set.box());
  } else if (cfg.controller == "explicit") {
    PartitionOptions opts;
    if (cfg.grid) opts.seed_per_edge = *cfg.grid;
    const auto ec = std::make_shared<const ExplicitController>(
        PartitionHull(p.map, p.hull, p.input_set, p.u_des, opts, tol));
    ctrl = ExplicitFilterController(ec, map, u_set, p.u_des,
                                    ExplicitFallback::kOnlineQp, tol);
  } else {
    throw InvalidArgument("unknown controller '" + cfg.controller + "'");
  }
  const auto x0s = RandomStates(p.hull, sim.trajectories, cfg.seed);
  const auto runs =
      BatchIntegrate(sim.dynamics, ctrl, x0s, sim.horizon, sim.dt, sim.cbfs);
  const double margin = SafetyMargin(runs, sim.cbfs);
  int failures = 0;
  for (const auto& r : runs) failures += r.failed ? 1 : 0;

  const std::string dir = cfg.out.empty() ? "." : cfg.out;
  ordered_json files = ordered_json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string rel =
        cfg.controller + "_" + std::to_string(i) + ".csv";
    WriteFile((std::filesystem::path(dir) / rel).string(), TrajectoryCsv(runs[i]));
    files.push_back(rel);
  }
  ordered_json body{{"controller", cfg.controller},
                    {"seed", cfg.seed},
                    {"horizon", sim.horizon},
                    {"dt", sim.dt},
                    {"trajectories", runs.size()},
                    {"failures", failures},
                    {"safety_margin", margin},
                    {"files", files}};
  WriteFile((std::filesystem::path(dir) / "simulation.json").string(),
            RenderReport("simulation", pf.content_hash, tol, body));
  std::cerr << "safety margin: " << margin << ", failures: " << failures << "\n";
  if (failures > 0 || margin < -1e-6) return kFalsified;
  return kOk;
}

int Demo(const RunConfig& cfg) {
  BundleOptions opts;
  opts.seed = cfg.seed;
  opts.tol = cfg.Tolerances();
  if (cfg.grid) opts.per_edge = *cfg.grid;
  const std::string dir = cfg.out.empty() ? "demo_" + cfg.demo : cfg.out;
  const BundleSummary s = RunCaseStudy(cfg.demo, dir, opts);
  std::cerr << s.name << ": " << ToString(s.outcome.status)
            << ", scan min margin " << s.scan.min_margin << ", "
            << s.files.size() << " files in " << dir << "\n";
  for (const auto& sim : s.simulations)
    std::cerr << "  " << sim.controller << ": safety margin "
              << sim.safety_margin << "\n";
  return kOk;
}

void AddCommon(CLI::App* app, RunConfig& cfg, bool problem = true) {
  if (problem)
    app->add_option("--problem", cfg.problem, "problem file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
  app->add_option("--tol-feas", cfg.tol_feas, "feasibility tolerance")
      ->check(CLI::PositiveNumber);
  app->add_option("--tol-active", cfg.tol_active, "activity tolerance")
      ->check(CLI::PositiveNumber);
  app->add_option("--grid", cfg.grid, "grid points per simplex edge")
      ->check(CLI::Range(2, 100000));
  app->add_option("--out", cfg.out, "output file or directory");
  app->add_option("--seed", cfg.seed, "random seed");
  app->add_option("--format", cfg.format, "report format")
      ->check(CLI::IsMember({"json", "csv"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compatibility certificates and explicit safety filters for "
               "stacked CBF constraints on convex hulls"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* certify = app.add_subcommand("certify", "run the certificate cascade");
  AddCommon(certify, cfg);
  certify->add_option("--cascade", cfg.cascade,
                      "order, e.g. endpoint,interval,common,blend");
  auto* expl = app.add_subcommand("explicit", "synthesize the explicit filter");
  AddCommon(expl, cfg);
  auto* oracle = app.add_subcommand("oracle", "brute-force margin scan");
  AddCommon(oracle, cfg);
  auto* simulate = app.add_subcommand("simulate", "closed-loop simulation");
  AddCommon(simulate, cfg);
  simulate->add_option("--controller", cfg.controller,
                       "qp, explicit, constant or nominal")
      ->check(CLI::IsMember({"qp", "explicit", "constant", "nominal"}));
  auto* demo = app.add_subcommand("demo", "run a built-in case study");
  demo->add_option("name", cfg.demo, "example1, case1, case2 or case3")
      ->required()
      ->check(CLI::IsMember({"example1", "case1", "case2", "case3"}));
  AddCommon(demo, cfg, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*certify) return Certify(cfg);
    if (*expl) return Explicit(cfg);
    if (*oracle) return Oracle(cfg);
    if (*simulate) return Simulate(cfg);
    if (*demo) return Demo(cfg);
  } catch (const cbfhull::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
