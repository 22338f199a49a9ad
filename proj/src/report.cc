#include "cbfhull/report.h"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "cbfhull/case_studies.h"
#include "cbfhull/controllers.h"
#include "cbfhull/errors.h"
#include "cbfhull/problem_io.h"

namespace cbfhull {

ordered_json ToJson(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

ordered_json ToJson(const Eigen::MatrixXd& m) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    a.push_back(ToJson(Eigen::VectorXd(m.row(r).transpose())));
  return a;
}

ordered_json ToJson(const ToleranceConfig& t) {
  return {{"feas", t.feas},   {"active", t.active},     {"eig", t.eig},
          {"sign", t.sign},   {"pivot", t.pivot},       {"pairwise", t.pairwise},
          {"licq", t.licq},   {"hull", t.hull}};
}

ordered_json ToJson(const AssumptionReport& r) {
  ordered_json delta = ordered_json::array();
  for (auto c : r.delta_class) delta.push_back(ToString(c));
  ordered_json cols = ordered_json::array();
  for (auto c : r.column_class) cols.push_back(ToString(c));
  return {{"dims_ok", r.dims_ok}, {"A2_ok", r.a2_ok},  {"A3_ok", r.a3_ok},
          {"delta_class", delta}, {"column_class", cols}};
}

namespace {

const char* SignName(ColumnSign s) {
  switch (s) {
    case ColumnSign::kNonneg:
      return "nonneg";
    case ColumnSign::kNonpos:
      return "nonpos";
    case ColumnSign::kInconclusive:
      return "inconclusive";
  }
  return "?";
}

ordered_json IndexLists(const std::vector<std::vector<int>>& lists) {
  ordered_json a = ordered_json::array();
  for (const auto& l : lists) {
    ordered_json b = ordered_json::array();
    for (int i : l) b.push_back(i + 1);
    a.push_back(b);
  }
  return a;
}

struct WitnessJson {
  ordered_json operator()(const std::monostate&) const { return nullptr; }
  ordered_json operator()(const EndpointCert& c) const {
    ordered_json signs = ordered_json::array();
    for (auto s : c.column_signs) signs.push_back(SignName(s));
    return {{"type", "endpoint"},
            {"u", ToJson(c.u)},
            {"column_signs", signs},
            {"margin", c.margin}};
  }
  ordered_json operator()(const IntervalCert& c) const {
    return {{"type", "interval"},
            {"lo", ToJson(c.lo)},
            {"hi", ToJson(c.hi)},
            {"L", ToJson(c.lower_bound)},
            {"U", ToJson(c.upper_bound)},
            {"P", IndexLists(c.positive)},
            {"N", IndexLists(c.negative)},
            {"vertex_inputs_feasible", c.vertex_inputs_feasible},
            {"box_margin", c.box_margin}};
  }
  ordered_json operator()(const CommonCert& c) const {
    return {{"type", "common"}, {"u", ToJson(c.u)}, {"margin", c.margin}};
  }
  ordered_json operator()(const BlendCert& c) const {
    ordered_json in = ordered_json::array();
    for (const auto& u : c.inputs) in.push_back(ToJson(u));
    return {{"type", "blend"},
            {"vertex_inputs", in},
            {"vertex_margins", c.vertex_margins},
            {"margin", c.margin},
            {"pairwise_violation", c.pairwise_violation}};
  }
};

}  // namespace

ordered_json ToJson(const CertificateOutcome& o) {
  ordered_json diags = ordered_json::array();
  for (const auto& d : o.diagnostics)
    diags.push_back({{"certificate", ToString(d.certificate)},
                     {"failure", ToString(d.failure)},
                     {"message", d.message}});
  ordered_json j;
  j["status"] = ToString(o.status);
  j["certificate"] =
      o.certificate ? ordered_json(ToString(*o.certificate)) : ordered_json();
  j["witness"] = std::visit(WitnessJson{}, o.witness);
  j["assumptions"] = ToJson(o.assumptions);
  j["diagnostics"] = diags;
  return j;
}

ordered_json ToJson(const ScanReport& r) {
  ordered_json j;
  j["mode"] = r.mode;
  j["samples"] = r.samples;
  j["per_edge"] = r.per_edge;
  if (r.mode == "random") j["seed"] = r.seed;
  j["min_margin"] = r.min_margin;
  j["argmin"] = ToJson(r.argmin);
  j["argmin_lambda"] = ToJson(r.argmin_lambda);
  return j;
}

ordered_json ToJson(const CertificateCheck& c) {
  return {{"pass", c.pass},
          {"samples", c.samples},
          {"inputs_tested", c.inputs_tested},
          {"min_residual", c.min_residual},
          {"worst_x", ToJson(c.worst_x)},
          {"worst_u", ToJson(c.worst_u)},
          {"message", c.message}};
}

namespace {

ordered_json Indices(const std::vector<int>& v) {
  ordered_json a = ordered_json::array();
  for (int i : v) a.push_back(i + 1);
  return a;
}

std::vector<int> IndicesFrom(const nlohmann::json& j) {
  std::vector<int> out;
  for (const auto& v : j) out.push_back(v.get<int>() - 1);
  return out;
}

Eigen::VectorXd VecFrom(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

Eigen::MatrixXd MatFrom(const nlohmann::json& j, int cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) m.row(r) = VecFrom(j[r]);
  return m;
}

}  // namespace

ordered_json ToJson(const ExplicitController& c) {
  ordered_json regions = ordered_json::array();
  for (const auto& r : c.regions()) {
    ordered_json verts = ordered_json::array();
    for (const auto& v : r.vertices) verts.push_back(ToJson(v));
    regions.push_back({{"active_cbf", Indices(r.active.cbf)},
                       {"active_input", Indices(r.active.input)},
                       {"R", ToJson(r.rows.a)},
                       {"s", ToJson(r.rows.b)},
                       {"F", ToJson(r.law.F)},
                       {"f", ToJson(r.law.f)},
                       {"lambda_gain", ToJson(r.law.lambda_gain)},
                       {"lambda0", ToJson(r.law.lambda0)},
                       {"nu_gain", ToJson(r.law.nu_gain)},
                       {"nu0", ToJson(r.law.nu0)},
                       {"vertices", verts}});
  }
  return {{"n", c.n()},
          {"m", c.m()},
          {"hull", {{"A", ToJson(c.hull().a)}, {"b", ToJson(c.hull().b)}}},
          {"regions", regions}};
}

ExplicitController ControllerFromJson(const nlohmann::json& j) {
  try {
    const int n = j.at("n").get<int>();
    const int m = j.at("m").get<int>();
    geometry::Halfspaces hull{MatFrom(j.at("hull").at("A"), n),
                              VecFrom(j.at("hull").at("b"))};
    std::vector<CriticalRegion> regions;
    for (const auto& rj : j.at("regions")) {
      CriticalRegion r;
      r.active.cbf = IndicesFrom(rj.at("active_cbf"));
      r.active.input = IndicesFrom(rj.at("active_input"));
      r.rows = {MatFrom(rj.at("R"), n), VecFrom(rj.at("s"))};
      r.law.F = MatFrom(rj.at("F"), n);
      r.law.f = VecFrom(rj.at("f"));
      r.law.lambda_gain = MatFrom(rj.at("lambda_gain"), n);
      r.law.lambda0 = VecFrom(rj.at("lambda0"));
      r.law.nu_gain = MatFrom(rj.at("nu_gain"), n);
      r.law.nu0 = VecFrom(rj.at("nu0"));
      for (const auto& v : rj.at("vertices")) r.vertices.push_back(VecFrom(v));
      if (r.law.F.rows() != m)
        throw ParseError("controller region law has wrong input dimension");
      regions.push_back(std::move(r));
    }
    return ExplicitController(std::move(regions), std::move(hull), n, m);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed controller document: ") + e.what());
  }
}

namespace {

std::string Timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

std::string RenderReport(const std::string& kind,
                         const std::string& problem_hash,
                         const ToleranceConfig& tol, const ordered_json& body) {
  ordered_json doc;
  doc["generated"] = Timestamp();
  doc["kind"] = kind;
  doc["problem_hash"] = problem_hash;
  doc["tolerances"] = ToJson(tol);
  doc["result"] = body;
  return doc.dump(2) + "\n";
}

std::string StripTimestamp(const std::string& report) {
  std::istringstream in(report);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.find("\"generated\"") == std::string::npos) out << line << '\n';
  return out.str();
}

std::string ScanCsv(const ScanReport& r) {
  std::ostringstream os;
  os.precision(12);
  if (r.sample_points.empty()) return "";
  const auto nl = r.sample_points.front().lambda.size();
  const auto n = r.sample_points.front().x.size();
  for (Eigen::Index j = 0; j < nl; ++j) os << "lambda" << j + 1 << ',';
  for (Eigen::Index i = 0; i < n; ++i) os << 'x' << i + 1 << ',';
  os << "margin\n";
  for (std::size_t s = 0; s < r.sample_points.size(); ++s) {
    for (Eigen::Index j = 0; j < nl; ++j)
      os << r.sample_points[s].lambda(j) << ',';
    for (Eigen::Index i = 0; i < n; ++i) os << r.sample_points[s].x(i) << ',';
    os << r.margins[s] << '\n';
  }
  return os.str();
}

void WriteFile(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << content;
}

namespace {

SimulationSet Simulate(const std::string& label, const CaseStudy& cs,
                       const Controller& ctrl,
                       const std::vector<Eigen::VectorXd>& x0s) {
  SimulationSet set;
  set.controller = label;
  set.runs = BatchIntegrate(*cs.dynamics, ctrl, x0s, cs.horizon, cs.dt, cs.cbfs);
  set.safety_margin = SafetyMargin(set.runs, cs.cbfs);
  for (const auto& t : set.runs) {
    if (t.failed) ++set.failures;
    for (const auto& s : t.status)
      if (s == "fallback") ++set.fallback_steps;
  }
  return set;
}

double QpDeviation(const std::vector<Trajectory>& runs, const Problem& p,
                   const ToleranceConfig& tol) {
  double worst = 0.0;
  for (const auto& t : runs) {
    for (std::size_t k = 0; k < t.states.size(); ++k) {
      if (t.status[k] == "failed") continue;
      const StackedValue v = p.map.Eval(t.states[k]);
      const QpSolution s = SolveQpProjection(p.u_des(t.states[k]), v.psi,
                                             v.delta, p.input_set, tol);
      worst = std::max(worst, (s.u - t.inputs[k]).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

}  // namespace

BundleSummary RunCaseStudy(const std::string& name, const std::string& out_dir,
                           const BundleOptions& options) {
  CaseStudy cs = LoadCaseStudy(name);
  cs.seed = options.seed;
  const Problem& p = cs.problem;
  const ToleranceConfig& tol = options.tol;
  const std::string problem_text = ProblemToJson(cs);
  const std::string hash = ContentHash(problem_text);
  BundleSummary out;
  out.name = name;
  auto emit = [&](const std::string& rel, const std::string& content) {
    if (!options.write_files) return;
    const std::string path = (std::filesystem::path(out_dir) / rel).string();
    WriteFile(path, content);
    out.files.push_back(rel);
  };
  emit("problem.json", problem_text);

  CascadePolicy policy;
  policy.vertex_inputs = p.vertex_inputs;
  out.outcome = Certify(p.map, p.hull, p.input_set, policy, tol);
  ordered_json cert = ToJson(out.outcome);
  if (p.vertex_inputs && p.input_set.is_box()) {
    auto iv = CpcInterval(p.map, p.hull, p.input_set, *p.vertex_inputs, tol);
    ordered_json ij;
    ij["valid"] = static_cast<bool>(iv);
    if (iv) ij["witness"] = WitnessJson{}(*iv.cert);
    ordered_json d = ordered_json::array();
    for (const auto& x : iv.diagnostics) d.push_back(x.message);
    ij["diagnostics"] = d;
    cert["interval_with_reference_inputs"] = ij;
  }
  emit("certificate.json", RenderReport("certificate", hash, tol, cert));

  ScanOptions so;
  so.per_edge = name == "example1" ? 61 : options.per_edge;
  so.seed = options.seed;
  out.scan = GridScan(p.map, p.hull, p.input_set, so, tol);
  emit("scan.json", RenderReport("scan", hash, tol, ToJson(out.scan)));
  if (out.outcome.valid()) {
    const CertificateCheck check =
        CheckCertificate(out.outcome, p.map, p.hull, p.input_set, so);
    emit("check.json", RenderReport("check", hash, tol, ToJson(check)));
  }

  if (cs.dynamics) {
    const auto map = std::make_shared<const StackedMap>(p.map);
    const auto u_set = std::make_shared<const InputSet>(p.input_set);
    std::vector<Eigen::VectorXd> x0s;
    if (name == "case3") {
      x0s = RandomStates(p.hull, cs.trajectories, cs.seed);
    } else {
      x0s = RandomStates(Eigen::VectorXd::Constant(3, 25.0),
                         Eigen::VectorXd::Constant(3, 30.0), cs.trajectories,
                         cs.seed);
    }
    if (name == "case3") {
      const auto ec = std::make_shared<const ExplicitController>(
          PartitionHull(p.map, p.hull, p.input_set, p.u_des, {}, tol));
      out.regions = static_cast<int>(ec->regions().size());
      emit("controller.json",
           RenderReport("explicit_controller", hash, tol, ToJson(*ec)));
      SimulationSet ex = Simulate(
          "explicit", cs,
          ExplicitFilterController(ec, map, u_set, p.u_des,
                                   ExplicitFallback::kOnlineQp, tol),
          x0s);
      ex.max_qp_deviation = QpDeviation(ex.runs, p, tol);
      out.simulations.push_back(std::move(ex));
      out.simulations.push_back(Simulate(
          "qp", cs, QpFilterController(map, u_set, p.u_des, tol), x0s));
    } else {
      out.simulations.push_back(Simulate(
          "nominal", cs,
          ClippedAffineController(ThermalNominal(), *p.input_set.box()), x0s));
      Eigen::VectorXd constant;
      if (cs.reference_witness) {
        constant = *cs.reference_witness;
      } else if (const auto* e = std::get_if<EndpointCert>(&out.outcome.witness)) {
        constant = e->u;
      } else if (const auto* c = std::get_if<CommonCert>(&out.outcome.witness)) {
        constant = c->u;
      }
      if (constant.size() == p.map.m())
        out.simulations.push_back(
            Simulate("constant", cs, ConstantController(constant), x0s));
      out.simulations.push_back(Simulate(
          "qp", cs, QpFilterController(map, u_set, p.u_des, tol), x0s));
    }
  }

  ordered_json sims = ordered_json::array();
  for (const auto& s : out.simulations) {
    ordered_json files = ordered_json::array();
    for (std::size_t i = 0; i < s.runs.size(); ++i) {
      const std::string rel =
          "trajectories/" + s.controller + "_" + std::to_string(i) + ".csv";
      emit(rel, TrajectoryCsv(s.runs[i]));
      files.push_back(rel);
    }
    ordered_json sj{{"controller", s.controller},
                    {"trajectories", s.runs.size()},
                    {"safety_margin", s.safety_margin},
                    {"failures", s.failures},
                    {"fallback_steps", s.fallback_steps},
                    {"files", files}};
    if (s.max_qp_deviation >= 0) sj["max_qp_deviation"] = s.max_qp_deviation;
    sims.push_back(sj);
  }
  ordered_json manifest;
  manifest["case"] = name;
  manifest["seed"] = options.seed;
  manifest["status"] = ToString(out.outcome.status);
  manifest["scan_min_margin"] = out.scan.min_margin;
  if (name == "case3") manifest["regions"] = out.regions;
  if (cs.dynamics) {
    manifest["horizon"] = cs.horizon;
    manifest["dt"] = cs.dt;
  }
  manifest["simulations"] = sims;
  manifest["files"] = out.files;
  emit("manifest.json", RenderReport("bundle", hash, tol, manifest));
  return out;
}

}  // namespace cbfhull
