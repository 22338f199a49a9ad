#pragma once

namespace cbfhull {

enum class CurvatureClass { kAffine, kConcave, kConvex, kIndefinite };

inline const char* ToString(CurvatureClass c) {
  switch (c) {
    case CurvatureClass::kAffine:
      return "affine";
    case CurvatureClass::kConcave:
      return "concave";
    case CurvatureClass::kConvex:
      return "convex";
    case CurvatureClass::kIndefinite:
      return "indefinite";
  }
  return "unknown";
}

// Affine functions are both concave and convex.
inline bool IsConcaveOrAffine(CurvatureClass c) {
  return c == CurvatureClass::kAffine || c == CurvatureClass::kConcave;
}
inline bool IsConvexOrAffine(CurvatureClass c) {
  return c == CurvatureClass::kAffine || c == CurvatureClass::kConvex;
}

}  // namespace cbfhull
