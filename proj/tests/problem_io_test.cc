#include <fstream>
#include <random>

#include <doctest.h>

#include "cbfhull/case_studies.h"
#include "cbfhull/errors.h"
#include "cbfhull/geometry.h"
#include "cbfhull/problem_io.h"

using namespace cbfhull;

namespace {

const std::string kDir = CBFHULL_PROBLEMS_DIR;

std::string ParseErrorOf(const std::string& text) {
  try {
    ParseProblem(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

// Minimal valid document; tests splice fields into it.
std::string Doc(const std::string& psi = R"([[{"d": 1}]])",
                const std::string& extra = "") {
  return R"({"n": 1, "m": 1, "p": 1, "psi": )" + psi +
         R"(, "delta": [{"c": [-1], "d": 2}],
  "input_set": {"box": {"umin": [0], "umax": [1]}},
  "hull": {"vertices": [[0], [1]]},
  "u_des": {"U": [[0]], "u0": [0]})" +
         extra + "}";
}

void ExpectSameProblem(const Problem& a, const Problem& b) {
  REQUIRE(a.map.n() == b.map.n());
  REQUIRE(a.map.m() == b.map.m());
  REQUIRE(a.map.p() == b.map.p());
  REQUIRE(a.hull.size() == b.hull.size());
  for (int j = 0; j < a.hull.size(); ++j)
    CHECK((a.hull.vertex(j) - b.hull.vertex(j)).norm() <= 1e-12);
  CHECK(a.input_set.G().isApprox(b.input_set.G()));
  CHECK(a.input_set.b().isApprox(b.input_set.b()));
  for (const geometry::HullSample& s : geometry::RandomHullSamples(a.hull, 50, 1)) {
    const StackedValue va = a.map.Eval(s.x), vb = b.map.Eval(s.x);
    CHECK((va.psi - vb.psi).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((va.delta - vb.delta).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((a.u_des(s.x) - b.u_des(s.x)).norm() <= 1e-12);
  }
}

}  // namespace

TEST_CASE("shipped problem files match the built-in case studies") {
  for (const std::string name : {"example1", "case1", "case2", "case3"}) {
    CAPTURE(name);
    const ProblemFile pf = LoadProblemFile(kDir + "/" + name + ".json");
    CHECK(pf.name == name);
    ExpectSameProblem(pf.problem, LoadCaseStudy(name).problem);
    CHECK(pf.content_hash.size() == 16);
  }
}

TEST_CASE("ProblemToJson round trips") {
  for (const std::string name : {"example1", "case1", "case2", "case3"}) {
    const CaseStudy cs = LoadCaseStudy(name);
    const ProblemFile pf = ParseProblem(ProblemToJson(cs));
    ExpectSameProblem(pf.problem, cs.problem);
    CHECK(pf.problem.vertex_inputs.has_value() ==
          cs.problem.vertex_inputs.has_value());
    if (cs.dynamics) REQUIRE(pf.sim.has_value());
  }
}

TEST_CASE("lti section overrides psi and delta") {
  const std::string text = R"({"n": 2, "m": 1, "p": 2,
  "psi": [[{"d": 42}], [{"d": 42}]], "delta": [{"d": 42}, {"d": 42}],
  "lti": {"A": [[0, 1], [0.1, -0.1]], "B": [[0], [1]],
          "cbfs": [{"a": [1, 1], "b": 1, "kappa": 1},
                   {"a": [-1, -1], "b": 1, "kappa": 1}]},
  "input_set": {"box": {"umin": [-1], "umax": [1]}},
  "hull": {"vertices": [[-1, 0], [0, 1], [1, -1]]},
  "u_des": {"U": [[0, 0]], "u0": [0]}})";
  const ProblemFile pf = ParseProblem(text);
  CHECK(pf.problem.map.p() == 2);
  const StackedValue v = pf.problem.map.Eval(Eigen::Vector2d(0, 1));
  CHECK(v.psi(0, 0) == doctest::Approx(1.0));
  CHECK(v.delta(1) == doctest::Approx(-0.9));
}

TEST_CASE("syntax errors carry line and column") {
  const std::string msg = ParseErrorOf("{\n  \"n\": 1\n  \"m\": 1\n}");
  CHECK(msg.find("line 3") != std::string::npos);
  CHECK(msg.find("column") != std::string::npos);
}

TEST_CASE("schema errors carry the field path") {
  CHECK(ParseErrorOf(Doc(R"([[{"Q": [[1]], "c": [0], "d": 0, "cubic": [1]}]])"))
            .find("psi[0][0].cubic") != std::string::npos);
  CHECK(ParseErrorOf(Doc(R"([[{"c": [0, 1]}]])")).find("psi[0][0].c") !=
        std::string::npos);
  CHECK(ParseErrorOf(Doc(R"([[{"d": "x"}]])")).find("psi[0][0].d") !=
        std::string::npos);
  CHECK(ParseErrorOf(Doc(R"([[{"d": 1}]])", R"(, "bogus": 1)"))
            .find("bogus") != std::string::npos);
  CHECK(ParseErrorOf(Doc(R"([[{"d": 1}]])", R"(, "vertex_inputs": [[0]])"))
            .find("vertex_inputs") != std::string::npos);
  CHECK(ParseErrorOf(R"({"n": 1})").find("missing") != std::string::npos);
  CHECK(ParseErrorOf("[1, 2]") != "");
}

TEST_CASE("semantic errors surface as parse errors") {
  // Box with umin > umax.
  std::string bad = Doc();
  bad.replace(bad.find("\"umin\": [0]"), 11, "\"umin\": [2]");
  CHECK(ParseErrorOf(bad).find("u_min > u_max") != std::string::npos);
  // Duplicate hull vertices.
  std::string dup = Doc();
  dup.replace(dup.find("[[0], [1]]"), 10, "[[0], [0]]");
  CHECK_FALSE(ParseErrorOf(dup).empty());
}

TEST_CASE("LoadProblemFile reports unreadable files") {
  CHECK_THROWS_AS(LoadProblemFile(kDir + "/does_not_exist.json"), ParseError);
}

TEST_CASE("ContentHash") {
  CHECK(ContentHash("") == "cbf29ce484222325");
  CHECK(ContentHash("a") == "af63dc4c8601ec8c");
  CHECK(ContentHash("ab") != ContentHash("ba"));
}
