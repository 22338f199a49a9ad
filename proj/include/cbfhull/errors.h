#pragma once

#include <stdexcept>
#include <string>

namespace cbfhull {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class InfeasibleQP : public Error {
 public:
  InfeasibleQP(const std::string& what, double margin)
      : Error(what), margin_(margin) {}
  // Best achievable uniform slack; negative by construction.
  double margin() const { return margin_; }

 private:
  double margin_;
};

class A3Violated : public Error {
 public:
  A3Violated(int column)
      : Error("column " + std::to_string(column) +
              " of Psi is neither concave, convex, nor affine"),
        column_(column) {}
  int column() const { return column_; }

 private:
  int column_;
};

class ConeViolation : public Error {
 public:
  using Error::Error;
};

class VertexIncompatible : public Error {
 public:
  VertexIncompatible(int vertex, double margin)
      : Error("vertex " + std::to_string(vertex) +
              " admits no feasible input (margin " + std::to_string(margin) +
              ")"),
        vertex_(vertex),
        margin_(margin) {}
  int vertex() const { return vertex_; }
  double margin() const { return margin_; }

 private:
  int vertex_;
  double margin_;
};

class LicqViolated : public Error {
 public:
  using Error::Error;
};

class Assumption2Violated : public Error {
 public:
  using Error::Error;
};

class UnresolvedRegion : public Error {
 public:
  using Error::Error;
};

class OutsideHull : public Error {
 public:
  using Error::Error;
};

class NoRegion : public Error {
 public:
  using Error::Error;
};

class NotInRegion : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace cbfhull
