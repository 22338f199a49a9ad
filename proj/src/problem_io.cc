#include "cbfhull/problem_io.h"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cbfhull/errors.h"

namespace cbfhull {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string ContentHash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

[[noreturn]] void Fail(const std::string& path, const std::string& what) {
  throw ParseError("field '" + path + "': " + what);
}

void AllowKeys(const json& j, const std::string& path,
               const std::set<std::string>& allowed) {
  if (!j.is_object()) Fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      Fail(path + "." + it.key(), "unknown key");
  }
}

const json& Require(const json& j, const std::string& path,
                    const std::string& key) {
  if (!j.contains(key)) Fail(path + "." + key, "missing");
  return j.at(key);
}

double Number(const json& j, const std::string& path) {
  if (!j.is_number()) Fail(path, "expected a number");
  return j.get<double>();
}

int Integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) Fail(path, "expected an integer");
  return j.get<int>();
}

Eigen::VectorXd Vector(const json& j, const std::string& path, int size = -1) {
  if (!j.is_array()) Fail(path, "expected an array of numbers");
  if (size >= 0 && static_cast<int>(j.size()) != size)
    Fail(path, "expected length " + std::to_string(size) + ", got " +
                   std::to_string(j.size()));
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(i) = Number(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

Eigen::MatrixXd Matrix(const json& j, const std::string& path, int rows,
                       int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    Fail(path, "expected " + std::to_string(rows) + " rows");
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    m.row(r) = Vector(j[r], path + "[" + std::to_string(r) + "]", cols);
  return m;
}

QuadFunc Quad(const json& j, const std::string& path, int n) {
  AllowKeys(j, path, {"Q", "c", "d"});
  const Eigen::MatrixXd q =
      j.contains("Q") ? Matrix(j["Q"], path + ".Q", n, n)
                      : Eigen::MatrixXd::Zero(n, n);
  const Eigen::VectorXd c =
      j.contains("c") ? Vector(j["c"], path + ".c", n) : Eigen::VectorXd::Zero(n);
  const double d = j.contains("d") ? Number(j["d"], path + ".d") : 0.0;
  return QuadFunc(q, c, d);
}

std::vector<AffineCbf> Cbfs(const json& j, const std::string& path, int n) {
  if (!j.is_array() || j.empty()) Fail(path, "expected a nonempty array");
  std::vector<AffineCbf> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    AllowKeys(j[i], p, {"a", "b", "kappa"});
    AffineCbf h;
    h.a = Vector(Require(j[i], p, "a"), p + ".a", n);
    h.b = j[i].contains("b") ? Number(j[i]["b"], p + ".b") : 0.0;
    h.kappa = j[i].contains("kappa") ? Number(j[i]["kappa"], p + ".kappa") : 1.0;
    if (h.kappa < 0) Fail(p + ".kappa", "must be nonnegative");
    out.push_back(h);
  }
  return out;
}

InputSet Inputs(const json& j, int m) {
  const std::string path = "input_set";
  AllowKeys(j, path, {"box", "polytope"});
  std::optional<Box> box;
  std::optional<Polytope> poly;
  if (j.contains("box")) {
    AllowKeys(j["box"], path + ".box", {"umin", "umax"});
    box = Box{Vector(Require(j["box"], path + ".box", "umin"),
                     path + ".box.umin", m),
              Vector(Require(j["box"], path + ".box", "umax"),
                     path + ".box.umax", m)};
  }
  if (j.contains("polytope")) {
    const json& pj = j["polytope"];
    AllowKeys(pj, path + ".polytope", {"G", "b"});
    const Eigen::VectorXd b =
        Vector(Require(pj, path + ".polytope", "b"), path + ".polytope.b");
    poly = Polytope{Matrix(Require(pj, path + ".polytope", "G"),
                           path + ".polytope.G", static_cast<int>(b.size()), m),
                    b};
  }
  if (!box && !poly) Fail(path, "needs a box or a polytope");
  try {
    return InputSet(box, poly);
  } catch (const Error& e) {
    Fail(path, e.what());
  }
}

std::string LineContext(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

namespace {

ProblemFile ParseChecked(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("syntax error at " + LineContext(text, e.byte) + ": " +
                     e.what());
  }
  AllowKeys(j, "$", {"name", "n", "m", "p", "psi", "delta", "input_set", "hull",
                     "u_des", "lti", "vertex_inputs", "sim"});
  const int n = Integer(Require(j, "$", "n"), "n");
  const int m = Integer(Require(j, "$", "m"), "m");
  if (n < 1) Fail("n", "must be >= 1");
  if (m < 1) Fail("m", "must be >= 1");
  const InputSet input_set = Inputs(Require(j, "$", "input_set"), m);

  std::optional<StackedMap> map;
  if (j.contains("lti")) {
    const json& lj = j["lti"];
    AllowKeys(lj, "lti", {"A", "B", "cbfs"});
    const Eigen::MatrixXd a = Matrix(Require(lj, "lti", "A"), "lti.A", n, n);
    const Eigen::MatrixXd b = Matrix(Require(lj, "lti", "B"), "lti.B", n, m);
    const auto cbfs = Cbfs(Require(lj, "lti", "cbfs"), "lti.cbfs", n);
    map = BuildFromLti(a, b, cbfs, input_set);
    if (j.contains("p") && Integer(j["p"], "p") != map->p())
      Fail("p", "does not match the number of lti.cbfs");
  } else {
    const int p = Integer(Require(j, "$", "p"), "p");
    if (p < 1) Fail("p", "must be >= 1");
    const json& pj = Require(j, "$", "psi");
    if (!pj.is_array() || static_cast<int>(pj.size()) != p)
      Fail("psi", "expected " + std::to_string(p) + " rows");
    std::vector<QuadFunc> psi, delta;
    for (int i = 0; i < p; ++i) {
      const std::string rp = "psi[" + std::to_string(i) + "]";
      if (!pj[i].is_array() || static_cast<int>(pj[i].size()) != m)
        Fail(rp, "expected " + std::to_string(m) + " entries");
      for (int k = 0; k < m; ++k)
        psi.push_back(Quad(pj[i][k], rp + "[" + std::to_string(k) + "]", n));
    }
    const json& dj = Require(j, "$", "delta");
    if (!dj.is_array() || static_cast<int>(dj.size()) != p)
      Fail("delta", "expected " + std::to_string(p) + " entries");
    for (int i = 0; i < p; ++i)
      delta.push_back(Quad(dj[i], "delta[" + std::to_string(i) + "]", n));
    map = StackedMap(n, m, p, std::move(psi), std::move(delta));
  }

  const json& hj = Require(j, "$", "hull");
  AllowKeys(hj, "hull", {"vertices"});
  const json& vj = Require(hj, "hull", "vertices");
  if (!vj.is_array() || vj.empty()) Fail("hull.vertices", "expected vertices");
  std::vector<Eigen::VectorXd> verts;
  for (std::size_t i = 0; i < vj.size(); ++i)
    verts.push_back(
        Vector(vj[i], "hull.vertices[" + std::to_string(i) + "]", n));
  std::optional<Hull> hull;
  try {
    hull.emplace(std::move(verts));
  } catch (const Error& e) {
    Fail("hull.vertices", e.what());
  }

  DesiredInput u_des = DesiredInput::Zero(n, m);
  if (j.contains("u_des")) {
    AllowKeys(j["u_des"], "u_des", {"U", "u0"});
    if (j["u_des"].contains("U"))
      u_des.gain = Matrix(j["u_des"]["U"], "u_des.U", m, n);
    if (j["u_des"].contains("u0"))
      u_des.offset = Vector(j["u_des"]["u0"], "u_des.u0", m);
  }

  std::optional<std::vector<Eigen::VectorXd>> vertex_inputs;
  if (j.contains("vertex_inputs")) {
    const json& vi = j["vertex_inputs"];
    if (!vi.is_array() || vi.size() != vj.size())
      Fail("vertex_inputs", "expected one input per hull vertex");
    vertex_inputs.emplace();
    for (std::size_t i = 0; i < vi.size(); ++i)
      vertex_inputs->push_back(
          Vector(vi[i], "vertex_inputs[" + std::to_string(i) + "]", m));
  }

  ProblemFile out{
      j.value("name", std::string()),
      Problem{std::move(*map), std::move(*hull), input_set, u_des,
              vertex_inputs},
      std::nullopt, ContentHash(text)};

  if (j.contains("sim")) {
    const json& sj = j["sim"];
    AllowKeys(sj, "sim", {"dynamics", "three_room", "A", "B", "cbfs", "horizon",
                          "dt", "trajectories", "seed", "constant_input"});
    const std::string kind = Require(sj, "sim", "dynamics").get<std::string>();
    std::optional<Dynamics> dyn;
    if (kind == "three_room") {
      ThreeRoomParams tp;
      if (sj.contains("three_room")) {
        const json& t = sj["three_room"];
        AllowKeys(t, "sim.three_room", {"t_e", "a", "b", "c", "t_h"});
        if (t.contains("t_e")) tp.t_e = Number(t["t_e"], "sim.three_room.t_e");
        if (t.contains("a")) tp.a = Number(t["a"], "sim.three_room.a");
        if (t.contains("b")) tp.b = Number(t["b"], "sim.three_room.b");
        if (t.contains("c")) tp.c = Number(t["c"], "sim.three_room.c");
        if (t.contains("t_h")) tp.t_h = Number(t["t_h"], "sim.three_room.t_h");
      }
      if (n != 3 || m != 3) Fail("sim.dynamics", "three_room needs n = m = 3");
      dyn = ThreeRoom(tp);
    } else if (kind == "lti") {
      dyn = Dynamics::Lti(Matrix(Require(sj, "sim", "A"), "sim.A", n, n),
                          Matrix(Require(sj, "sim", "B"), "sim.B", n, m));
    } else {
      Fail("sim.dynamics", "expected \"three_room\" or \"lti\"");
    }
    SimSpec sim_spec{*dyn, Cbfs(Require(sj, "sim", "cbfs"), "sim.cbfs", n)};
    if (sj.contains("horizon")) sim_spec.horizon = Number(sj["horizon"], "sim.horizon");
    if (sj.contains("dt")) sim_spec.dt = Number(sj["dt"], "sim.dt");
    if (sj.contains("trajectories"))
      sim_spec.trajectories = Integer(sj["trajectories"], "sim.trajectories");
    if (sj.contains("seed"))
      sim_spec.seed = static_cast<std::uint64_t>(Integer(sj["seed"], "sim.seed"));
    if (sj.contains("constant_input"))
      sim_spec.constant_input =
          Vector(sj["constant_input"], "sim.constant_input", m);
    if (!(sim_spec.dt > 0) || sim_spec.horizon < sim_spec.dt)
      Fail("sim", "need dt > 0 and horizon >= dt");
    out.sim = std::move(sim_spec);
  }
  return out;
}

}  // namespace

ProblemFile ParseProblem(const std::string& text) {
  try {
    return ParseChecked(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed problem file: ") + e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("invalid problem: ") + e.what());
  }
}

ProblemFile LoadProblemFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open problem file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseProblem(ss.str());
}

namespace {

ordered_json Vec(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

ordered_json Mat(const Eigen::MatrixXd& m) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(Vec(m.row(r)));
  return a;
}

ordered_json QuadJson(const QuadFunc& q) {
  ordered_json o;
  if (q.Q().cwiseAbs().maxCoeff() > 0) o["Q"] = Mat(q.Q());
  if (q.c().cwiseAbs().maxCoeff() > 0) o["c"] = Vec(q.c());
  o["d"] = q.d();
  return o;
}

ordered_json CbfJson(const std::vector<AffineCbf>& cbfs) {
  ordered_json a = ordered_json::array();
  for (const auto& h : cbfs)
    a.push_back({{"a", Vec(h.a)}, {"b", h.b}, {"kappa", h.kappa}});
  return a;
}

}  // namespace

std::string ProblemToJson(const CaseStudy& cs) {
  const Problem& p = cs.problem;
  ordered_json j;
  j["name"] = cs.name;
  j["n"] = p.map.n();
  j["m"] = p.map.m();
  j["p"] = p.map.p();
  ordered_json psi = ordered_json::array();
  for (int i = 0; i < p.map.p(); ++i) {
    ordered_json row = ordered_json::array();
    for (int k = 0; k < p.map.m(); ++k) row.push_back(QuadJson(p.map.psi(i, k)));
    psi.push_back(row);
  }
  j["psi"] = psi;
  ordered_json delta = ordered_json::array();
  for (int i = 0; i < p.map.p(); ++i) delta.push_back(QuadJson(p.map.delta(i)));
  j["delta"] = delta;
  ordered_json u;
  if (p.input_set.box())
    u["box"] = {{"umin", Vec(p.input_set.box()->lower)},
                {"umax", Vec(p.input_set.box()->upper)}};
  if (p.input_set.polytope())
    u["polytope"] = {{"G", Mat(p.input_set.polytope()->g)},
                     {"b", Vec(p.input_set.polytope()->b)}};
  j["input_set"] = u;
  ordered_json verts = ordered_json::array();
  for (const auto& v : p.hull.vertices()) verts.push_back(Vec(v));
  j["hull"] = {{"vertices", verts}};
  j["u_des"] = {{"U", Mat(p.u_des.gain)}, {"u0", Vec(p.u_des.offset)}};
  if (p.vertex_inputs) {
    ordered_json vi = ordered_json::array();
    for (const auto& v : *p.vertex_inputs) vi.push_back(Vec(v));
    j["vertex_inputs"] = vi;
  }
  if (cs.dynamics) {
    ordered_json s;
    if (cs.name == "case1" || cs.name == "case2") {
      s["dynamics"] = "three_room";
      const ThreeRoomParams tp;
      s["three_room"] = {{"t_e", tp.t_e}, {"a", tp.a}, {"b", tp.b},
                         {"c", tp.c},     {"t_h", tp.t_h}};
    } else {
      s["dynamics"] = "lti";
      Eigen::MatrixXd a(p.map.n(), p.map.n()), b(p.map.n(), p.map.m());
      const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p.map.n());
      for (int i = 0; i < p.map.n(); ++i) {
        a.row(i) = cs.dynamics->drift(i).c().transpose();
        for (int k = 0; k < p.map.m(); ++k) b(i, k) = cs.dynamics->gain(i, k)(zero);
      }
      s["A"] = Mat(a);
      s["B"] = Mat(b);
    }
    s["cbfs"] = CbfJson(cs.cbfs);
    s["horizon"] = cs.horizon;
    s["dt"] = cs.dt;
    s["trajectories"] = cs.trajectories;
    s["seed"] = cs.seed;
    if (cs.reference_witness) s["constant_input"] = Vec(*cs.reference_witness);
    j["sim"] = s;
  }
  return j.dump(2) + "\n";
}

}  // namespace cbfhull
