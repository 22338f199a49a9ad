#pragma once

namespace cbfhull {

// Every numerical threshold used by the library. A single instance is threaded
// through solvers, certificates, and the oracle so that reports can embed the
// exact set used.
struct ToleranceConfig {
  double feas = 1e-8;       // constraint residual accepted as satisfied
  double active = 1e-7;     // activity / strict-complementarity threshold
  double eig = 1e-10;       // semidefiniteness threshold on eigenvalues
  double sign = 1e-10;      // entry sign tests at vertices
  double pivot = 1e-12;     // smallest simplex pivot magnitude
  double pairwise = 1e-9;   // pairwise blend condition
  double licq = 1e-8;       // smallest singular value for LICQ
  double hull = 1e-9;       // point-in-polytope slack
};

}  // namespace cbfhull
