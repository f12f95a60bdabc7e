#include "igno/oracle.hpp"

#include <cmath>
#include <string>

#include "igno/error.hpp"
#include "igno/rng.hpp"

namespace igno {

namespace {

inline double harmonic(double a, double b) { return 2.0 * a * b / (a + b); }

}  // namespace

GridField solve_elliptic(const EllipticProblem& problem, int n, double tol,
                         int max_iter, SolveStats* stats) {
  if (n < 2) throw DomainError("solve_elliptic: need n >= 2 interior nodes");
  if (max_iter <= 0) max_iter = 200 * (n + 1);
  const int nn = n + 2;  // nodes per axis including boundary
  const double h = 1.0 / (n + 1);
  const double inv_h2 = 1.0 / (h * h);

  // Nodal coefficient values; positivity is part of the operator contract.
  Matrix an(nn, nn);
  for (int iy = 0; iy < nn; ++iy)
    for (int ix = 0; ix < nn; ++ix) {
      double v = problem.a(ix * h, iy * h);
      if (!(v > 0.0))
        throw DomainError("solve_elliptic: coefficient not positive at (" +
                          std::to_string(ix * h) + ", " + std::to_string(iy * h) + ")");
      an(ix, iy) = v;
    }

  // Harmonic-mean face coefficients. fx(ix, iy) couples nodes (ix, iy) and
  // (ix+1, iy); fy couples (ix, iy) and (ix, iy+1).
  Matrix fx(nn - 1, nn), fy(nn, nn - 1);
  for (int iy = 0; iy < nn; ++iy)
    for (int ix = 0; ix + 1 < nn; ++ix) fx(ix, iy) = harmonic(an(ix, iy), an(ix + 1, iy));
  for (int iy = 0; iy + 1 < nn; ++iy)
    for (int ix = 0; ix < nn; ++ix) fy(ix, iy) = harmonic(an(ix, iy), an(ix, iy + 1));

  // Dirichlet values on the boundary ring.
  GridField u(nn, nn);
  for (int ix = 0; ix < nn; ++ix) {
    u.at(ix, 0) = problem.g(ix * h, 0.0);
    u.at(ix, nn - 1) = problem.g(ix * h, 1.0);
  }
  for (int iy = 0; iy < nn; ++iy) {
    u.at(0, iy) = problem.g(0.0, iy * h);
    u.at(nn - 1, iy) = problem.g(1.0, iy * h);
  }

  const int N = n * n;
  auto pack = [n](int ix, int iy) { return (iy - 1) * n + (ix - 1); };

  // Right-hand side: source plus boundary contributions.
  Vector b(N);
  for (int iy = 1; iy <= n; ++iy)
    for (int ix = 1; ix <= n; ++ix) {
      double v = problem.f(ix * h, iy * h);
      if (ix == 1) v += fx(0, iy) * u.at(0, iy) * inv_h2;
      if (ix == n) v += fx(n, iy) * u.at(nn - 1, iy) * inv_h2;
      if (iy == 1) v += fy(ix, 0) * u.at(ix, 0) * inv_h2;
      if (iy == n) v += fy(ix, n) * u.at(ix, nn - 1) * inv_h2;
      b[pack(ix, iy)] = v;
    }

  // Jacobi diagonal. The paired grouping below is kept in the matvec too so
  // mirror-symmetric problems stay symmetric to the last bit.
  Vector diag(N);
  for (int iy = 1; iy <= n; ++iy)
    for (int ix = 1; ix <= n; ++ix)
      diag[pack(ix, iy)] = ((fx(ix - 1, iy) + fx(ix, iy)) + (fy(ix, iy - 1) + fy(ix, iy))) * inv_h2;

  auto matvec = [&](const Vector& v, Vector& out) {
    for (int iy = 1; iy <= n; ++iy)
      for (int ix = 1; ix <= n; ++ix) {
        double c = v[pack(ix, iy)];
        double w = (ix > 1) ? v[pack(ix - 1, iy)] : 0.0;
        double e = (ix < n) ? v[pack(ix + 1, iy)] : 0.0;
        double s = (iy > 1) ? v[pack(ix, iy - 1)] : 0.0;
        double t = (iy < n) ? v[pack(ix, iy + 1)] : 0.0;
        double gx = fx(ix, iy) * (c - e) + fx(ix - 1, iy) * (c - w);
        double gy = fy(ix, iy) * (c - t) + fy(ix, iy - 1) * (c - s);
        out[pack(ix, iy)] = (gx + gy) * inv_h2;
      }
  };

  Vector x = Vector::Zero(N);
  double bnorm = b.norm();
  int iters = 0;
  double rel = 0.0;
  if (bnorm > 0) {
    Vector r = b, z(N), p(N), q(N);
    z = r.cwiseQuotient(diag);
    p = z;
    double rz = r.dot(z);
    rel = 1.0;
    for (iters = 0; iters < max_iter; ++iters) {
      matvec(p, q);
      double alpha = rz / p.dot(q);
      x += alpha * p;
      r -= alpha * q;
      rel = r.norm() / bnorm;
      if (rel <= tol) {
        ++iters;
        break;
      }
      z = r.cwiseQuotient(diag);
      double rz_new = r.dot(z);
      p = z + (rz_new / rz) * p;
      rz = rz_new;
    }
    if (rel > tol)
      throw NumericError("solve_elliptic.pcg",
                         "no convergence after " + std::to_string(iters) +
                             " iterations, relative residual " + std::to_string(rel));
  }
  if (stats) {
    stats->iterations = iters;
    stats->rel_residual = rel;
  }

  for (int iy = 1; iy <= n; ++iy)
    for (int ix = 1; ix <= n; ++ix) u.at(ix, iy) = x[pack(ix, iy)];
  return u;
}

SensorLayout place_interior_sensors(int m, std::uint64_t seed) {
  if (m < 1) throw ConfigError("place_interior_sensors: need m >= 1");
  Rng rng = make_rng(seed, /*stream=*/0x5e4505);
  SensorLayout s;
  s.xy.resize(m, 2);
  s.side.assign(m, -1);
  for (int i = 0; i < m; ++i) {
    s.xy(i, 0) = uniform_real(rng, 0.0, 1.0);
    s.xy(i, 1) = uniform_real(rng, 0.0, 1.0);
  }
  return s;
}

SensorLayout place_boundary_sensors(int m) {
  if (m < 4 || m % 4 != 0)
    throw ConfigError("place_boundary_sensors: m must be a positive multiple of 4");
  int per_side = m / 4;
  SensorLayout s;
  s.xy.resize(m, 2);
  s.side.assign(m, -1);
  for (int i = 0; i < per_side; ++i) {
    double t = (i + 0.5) / per_side;
    s.xy(i, 0) = t;
    s.xy(i, 1) = 0.0;
    s.side[i] = 0;
    s.xy(per_side + i, 0) = 1.0;
    s.xy(per_side + i, 1) = t;
    s.side[per_side + i] = 1;
    s.xy(2 * per_side + i, 0) = 1.0 - t;
    s.xy(2 * per_side + i, 1) = 1.0;
    s.side[2 * per_side + i] = 2;
    s.xy(3 * per_side + i, 0) = 0.0;
    s.xy(3 * per_side + i, 1) = 1.0 - t;
    s.side[3 * per_side + i] = 3;
  }
  return s;
}

Vector sensor_sample(const GridField& u, const SensorLayout& sensors) {
  Vector out(sensors.count());
  for (int i = 0; i < sensors.count(); ++i)
    out[i] = u.sample(sensors.xy(i, 0), sensors.xy(i, 1));
  return out;
}

Vector dtn_currents(const GridField& u, const ScalarFn& gamma,
                    const SensorLayout& sensors) {
  if (u.nx != u.ny) throw ShapeError("dtn_currents: expected a square grid");
  const double h = 1.0 / (u.nx - 1);
  Vector out(sensors.count());
  for (int i = 0; i < sensors.count(); ++i) {
    double x = sensors.xy(i, 0), y = sensors.xy(i, 1);
    int side = sensors.side[i];
    double dn;  // du / dnu, outward
    switch (side) {
      case 0:  // bottom, nu = (0, -1)
        dn = -(-3.0 * u.sample(x, 0.0) + 4.0 * u.sample(x, h) - u.sample(x, 2 * h)) / (2 * h);
        break;
      case 1:  // right, nu = (1, 0)
        dn = (3.0 * u.sample(1.0, y) - 4.0 * u.sample(1.0 - h, y) + u.sample(1.0 - 2 * h, y)) / (2 * h);
        break;
      case 2:  // top, nu = (0, 1)
        dn = (3.0 * u.sample(x, 1.0) - 4.0 * u.sample(x, 1.0 - h) + u.sample(x, 1.0 - 2 * h)) / (2 * h);
        break;
      case 3:  // left, nu = (-1, 0)
        dn = -(-3.0 * u.sample(0.0, y) + 4.0 * u.sample(h, y) - u.sample(2 * h, y)) / (2 * h);
        break;
      default:
        throw DomainError("dtn_currents: sensor " + std::to_string(i) +
                          " is not on the boundary");
    }
    out[i] = gamma(x, y) * dn;
  }
  return out;
}

}  // namespace igno
