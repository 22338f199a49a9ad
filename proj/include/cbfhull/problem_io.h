#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cbfhull/case_studies.h"
#include "cbfhull/problem_model.h"
#include "cbfhull/sim.h"

namespace cbfhull {

// Optional "sim" section of a problem file.
struct SimSpec {
  Dynamics dynamics;
  std::vector<AffineCbf> cbfs;
  double horizon = 40.0;
  double dt = 0.01;
  int trajectories = 10;
  std::uint64_t seed = 20240601;
  std::optional<Eigen::VectorXd> constant_input;
};

struct ProblemFile {
  std::string name;
  Problem problem;
  std::optional<SimSpec> sim;
  std::string content_hash;  // FNV-1a 64 of the raw text, hex
};

// Throws ParseError with line/column (syntax) or field path (schema) context.
ProblemFile ParseProblem(const std::string& text);
ProblemFile LoadProblemFile(const std::string& path);

// Round-trippable document for a case study.
std::string ProblemToJson(const CaseStudy& cs);

std::string ContentHash(const std::string& text);

}  // namespace cbfhull
