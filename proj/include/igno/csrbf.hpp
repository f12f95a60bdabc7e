#pragma once

#include <cmath>

#include "igno/array.hpp"

namespace igno {

// Wendland C2 compactly supported radial basis function on the unit
// interval of normalized distance s = r / R:
//   psi(s) = (1 - s)^4 (4 s + 1) for s in [0, 1), zero beyond.
// C2 across the support boundary; positive and monotone decreasing inside.
inline double wendland_c2(double s) {
  if (s >= 1.0) return 0.0;
  double t = 1.0 - s;
  double t2 = t * t;
  return t2 * t2 * (4.0 * s + 1.0);
}

// d psi / d s = -20 s (1 - s)^3
inline double wendland_c2_ds(double s) {
  if (s >= 1.0) return 0.0;
  double t = 1.0 - s;
  return -20.0 * s * t * t * t;
}

// Test function centered at c with support radius R, evaluated at an offset
// d = x - c. Returns the value; grad receives the spatial gradient, which is
// psi'(s) / R along the unit radial direction (zero at the center).
inline double csrbf_eval(const Vector2& d, double R, Vector2* grad = nullptr) {
  double r = d.norm();
  double s = r / R;
  if (grad) {
    if (r > 0 && s < 1.0) {
      double dpsi = wendland_c2_ds(s) / R;
      *grad = (dpsi / r) * d;
    } else {
      grad->setZero();
    }
  }
  return wendland_c2(s);
}

}  // namespace igno
