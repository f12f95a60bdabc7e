#pragma once

#include <cmath>

#include "igno/array.hpp"

namespace igno {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
// Legendre recurrence. Exact for polynomials of degree 2n-1.
inline void gauss_legendre(int n, Vector& nodes, Vector& weights) {
  if (n < 1) throw DomainError("gauss_legendre: need n >= 1");
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pn = 0, dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2 * k + 1) * t * p1 - k * p2) / (k + 1);
      }
      pn = p0;
      dp = n * (t * p0 - p1) / (t * t - 1.0);
      double dt = pn / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - t * t) * dp * dp);
    nodes[i] = -t;
    nodes[n - 1 - i] = t;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

// Product quadrature on a disk of radius R: Gauss-Legendre in the radial
// variable (after the r dr area substitution), midpoint rule in the angle
// (trapezoidal-equivalent on a periodic integrand). Offsets are relative to
// the disk center; weights sum to the disk area.
struct DiskQuadrature {
  Matrix offsets;  // q x 2
  Vector weights;  // q
  int size() const { return static_cast<int>(weights.size()); }
};

inline DiskQuadrature disk_quadrature(double radius, int n_radial, int n_angular) {
  if (radius <= 0) throw DomainError("disk_quadrature: radius must be positive");
  if (n_radial < 1 || n_angular < 1)
    throw DomainError("disk_quadrature: need at least one node per factor");
  Vector gx, gw;
  gauss_legendre(n_radial, gx, gw);
  DiskQuadrature q;
  int total = n_radial * n_angular;
  q.offsets.resize(total, 2);
  q.weights.resize(total);
  int idx = 0;
  for (int i = 0; i < n_radial; ++i) {
    double u = 0.5 * (gx[i] + 1.0);  // radial fraction in [0, 1]
    double wu = 0.5 * gw[i];
    for (int j = 0; j < n_angular; ++j) {
      double theta = 2.0 * M_PI * (j + 0.5) / n_angular;
      q.offsets(idx, 0) = radius * u * std::cos(theta);
      q.offsets(idx, 1) = radius * u * std::sin(theta);
      q.weights[idx] = radius * radius * wu * u * (2.0 * M_PI / n_angular);
      ++idx;
    }
  }
  return q;
}

}  // namespace igno
