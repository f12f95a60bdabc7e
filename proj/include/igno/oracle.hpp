#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "igno/array.hpp"

namespace igno {

using ScalarFn = std::function<double(double, double)>;

// -div(a grad u) = f on the unit square with Dirichlet data g on the
// boundary. The coefficient must be strictly positive on the closed square.
struct EllipticProblem {
  ScalarFn a;
  ScalarFn f;
  ScalarFn g;
};

struct SolveStats {
  int iterations = 0;
  double rel_residual = 0.0;
};

// Conservative five-point finite differences, n interior nodes per axis
// (h = 1/(n+1)), harmonic-mean face coefficients, Jacobi-preconditioned
// conjugate gradients to a relative residual of `tol`. Returns the solution
// on the full (n+2)^2 node grid including the Dirichlet boundary.
GridField solve_elliptic(const EllipticProblem& problem, int n,
                         double tol = 1e-10, int max_iter = 0,
                         SolveStats* stats = nullptr);

// Pressure / voltage probe positions. `side` is -1 for interior probes and
// 0 (bottom), 1 (right), 2 (top), 3 (left) for boundary probes.
struct SensorLayout {
  Matrix xy;
  std::vector<int> side;
  int count() const { return static_cast<int>(xy.rows()); }
};

// m points drawn uniformly over the open square; seeded and reproducible.
SensorLayout place_interior_sensors(int m, std::uint64_t seed);

// m/4 equispaced midpoints per side, ordered counterclockwise starting from
// the bottom edge. Requires m divisible by 4; corners are never hit.
SensorLayout place_boundary_sensors(int m);

// Bilinear interpolation of a grid solution at the sensor positions.
Vector sensor_sample(const GridField& u, const SensorLayout& sensors);

// Dirichlet-to-Neumann currents gamma * du/dnu (nu the outward normal) at
// boundary sensors, via second-order one-sided differencing into the domain.
Vector dtn_currents(const GridField& u, const ScalarFn& gamma,
                    const SensorLayout& sensors);

// Coefficient adapters for the solver.
inline ScalarFn nearest_pixel_fn(std::shared_ptr<const GridField> img) {
  return [img](double x, double y) { return img->sample_nearest(x, y); };
}

inline ScalarFn constant_fn(double c) {
  return [c](double, double) { return c; };
}

}  // namespace igno
