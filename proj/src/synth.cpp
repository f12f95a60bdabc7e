#include "igno/synth.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace igno {

namespace {
constexpr double kPi = std::numbers::pi;
}

ScalarFn trig_permeability_fn(double omega1, double omega2) {
  return [omega1, omega2](double x, double y) {
    return 2.1 + std::sin(omega1 * x) + std::cos(omega2 * y);
  };
}

Vector2 sample_trig_omegas(Rng& rng, bool out_of_dist) {
  const double lo = out_of_dist ? 7 * kPi / 4 : 0.0;
  const double hi = out_of_dist ? 2 * kPi : 7 * kPi / 4;
  double w1 = uniform_real(rng, lo, hi);
  double w2 = uniform_real(rng, lo, hi);
  return {w1, w2};
}

GridField sample_grid(const ScalarFn& fn, int nx, int ny) {
  GridField field(nx, ny);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      field.at(ix, iy) = fn(field.x(ix), field.y(iy));
  require_finite(field.values, "sample_grid");
  return field;
}

double gp_mode_variance(int i, int j, double tau2) {
  if (i < 0 || j < 0) throw DomainError("gp_mode_variance: negative mode index");
  if (tau2 <= 0) throw DomainError("gp_mode_variance: tau2 must be positive");
  double s = kPi * kPi * (i * i + j * j) + tau2;
  return 1.0 / (s * s);
}

GridField gp_sample(double tau2, int max_mode, Rng& rng, int nx, int ny) {
  const int m = max_mode + 1;
  Matrix xi(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      xi(i, j) = std::sqrt(gp_mode_variance(i, j, tau2)) * standard_normal(rng);

  GridField field(nx, ny);
  Matrix cx(nx, m), cy(ny, m);
  for (int ix = 0; ix < nx; ++ix)
    for (int i = 0; i < m; ++i) cx(ix, i) = std::cos(i * kPi * field.x(ix));
  for (int iy = 0; iy < ny; ++iy)
    for (int j = 0; j < m; ++j) cy(iy, j) = std::cos(j * kPi * field.y(iy));

  Matrix v = cy * xi.transpose() * cx.transpose();  // v(iy, ix)
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) field.at(ix, iy) = v(iy, ix);
  return field;
}

GridField threshold_field(const GridField& g, double lo, double hi) {
  GridField out = g;
  out.values = (g.values.array() > 0.0).select(hi, Vector::Constant(g.values.size(), lo));
  return out;
}

GridField cutoff_gp_field(double tau2, Rng& rng, int nx, int ny) {
  return threshold_field(gp_sample(tau2, kGpMaxMode, rng, nx, ny));
}

ScalarFn eit_conductivity_fn(const Vector& c) {
  const int K = static_cast<int>(c.size());
  if (K < 1 || K > 5)
    throw DomainError("eit_conductivity: need 1..5 terms, got " +
                      std::to_string(K));
  require_finite(c, "eit_conductivity");
  return [c](double x, double y) {
    double g = 0.0;
    for (int k = 1; k <= c.size(); ++k)
      g += std::exp(c[k - 1] * std::sin(k * kPi * x) * std::sin(k * kPi * y));
    return g;
  };
}

Vector sample_eit_coeffs(Rng& rng, bool out_of_dist) {
  int K = uniform_int(rng, 1, 5);
  const double lo = out_of_dist ? 1.0 : -1.0;
  const double hi = out_of_dist ? 1.5 : 1.0;
  Vector c(K);
  for (int k = 0; k < K; ++k) c[k] = uniform_real(rng, lo, hi);
  return c;
}

ScalarFn boundary_voltage(int l) {
  if (l < 1 || l > kNumVoltagePatterns)
    throw DomainError("boundary_voltage: pattern index " + std::to_string(l) +
                      " outside 1.." + std::to_string(kNumVoltagePatterns));
  const double theta = 2 * kPi * l / kNumVoltagePatterns;
  const double cx = std::cos(theta), cy = std::sin(theta);
  return [cx, cy](double x, double y) {
    return std::cos(2 * kPi * (x * cx + y * cy));
  };
}

double noise_sigma(const Vector& values, double snr_db) {
  if (values.size() == 0) throw ShapeError("noise_sigma: empty signal");
  double power = values.squaredNorm() / values.size();
  if (power == 0.0)
    throw DomainError("noise_sigma: zero signal has no finite-SNR noise level");
  return std::sqrt(power * std::pow(10.0, -snr_db / 10.0));
}

Vector add_noise(const Vector& values, double snr_db, Rng& rng) {
  if (values.size() == 0) throw ShapeError("add_noise: empty signal");
  if (snr_db == std::numeric_limits<double>::infinity()) return values;
  double sigma = noise_sigma(values, snr_db);
  Vector out = values;
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out[i] += sigma * standard_normal(rng);
  return out;
}

SensorLayout place_sensors(SensorKind kind, int m, std::uint64_t seed) {
  if (kind == SensorKind::interior_random)
    return place_interior_sensors(m, seed);
  return place_boundary_sensors(m);
}

}  // namespace igno
