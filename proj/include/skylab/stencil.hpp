#pragma once

#include "skylab/vec3.hpp"

namespace skylab {

/// First derivative along a sampled line: fourth-order central in the
/// interior, second-order central one node from the edge, second-order
/// one-sided at the edge. The interior stencil is skew, so discrete
/// summation by parts is exact for fields supported away from the boundary.
///
/// `at(t)` returns the line value at index t in [0, n).
template <class At>
inline Vec3 line_derivative(const At& at, int t, int n, double spacing) {
  const double inv2h = 0.5 / spacing;
  if (n < 5) {  // degenerate grids fall back to the three-point rules
    if (t == 0) return (at(0) * -3.0 + at(1) * 4.0 - at(2)) * inv2h;
    if (t == n - 1) return (at(n - 1) * 3.0 - at(n - 2) * 4.0 + at(n - 3)) * inv2h;
    return (at(t + 1) - at(t - 1)) * inv2h;
  }
  if (t >= 2 && t <= n - 3) {
    const double inv12h = 1.0 / (12.0 * spacing);
    return (at(t - 2) - at(t + 2) + (at(t + 1) - at(t - 1)) * 8.0) * inv12h;
  }
  if (t == 0) return (at(0) * -3.0 + at(1) * 4.0 - at(2)) * inv2h;
  if (t == n - 1) return (at(n - 1) * 3.0 - at(n - 2) * 4.0 + at(n - 3)) * inv2h;
  return (at(t + 1) - at(t - 1)) * inv2h;
}

/// Adjoint scatter of line_derivative: out(index, value) receives the
/// contribution of lane value `a` sitting at index t.
template <class Out>
inline void line_derivative_adjoint(const Vec3& a, int t, int n, double spacing, const Out& out) {
  const double inv2h = 0.5 / spacing;
  if (n >= 5 && t >= 2 && t <= n - 3) {
    const double inv12h = 1.0 / (12.0 * spacing);
    out(t - 2, a * inv12h);
    out(t + 2, a * -inv12h);
    out(t + 1, a * (8.0 * inv12h));
    out(t - 1, a * (-8.0 * inv12h));
    return;
  }
  if (t == 0) {
    out(0, a * (-3.0 * inv2h));
    out(1, a * (4.0 * inv2h));
    out(2, a * -inv2h);
    return;
  }
  if (t == n - 1) {
    out(n - 1, a * (3.0 * inv2h));
    out(n - 2, a * (-4.0 * inv2h));
    out(n - 3, a * inv2h);
    return;
  }
  out(t + 1, a * inv2h);
  out(t - 1, a * -inv2h);
}

}  // namespace skylab
