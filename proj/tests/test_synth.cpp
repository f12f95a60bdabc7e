#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>

#include "igno/synth.hpp"
#include "support.hpp"

using namespace igno;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("trigonometric permeability values") {
  auto flat = trig_permeability_fn(0.0, 0.0);
  GridField g = sample_grid(flat, 29, 29);
  CHECK(g.values.minCoeff() == doctest::Approx(3.1).epsilon(1e-15));
  CHECK(g.values.maxCoeff() == doctest::Approx(3.1).epsilon(1e-15));

  auto k = trig_permeability_fn(kPi, kPi);
  CHECK(k(0.5, 0.5) == doctest::Approx(3.1).epsilon(1e-12));

  Rng rng = make_rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Vector2 w = sample_trig_omegas(rng);
    GridField f = sample_grid(trig_permeability_fn(w[0], w[1]), 29, 29);
    CHECK(f.values.minCoeff() >= 0.1 - 1e-12);
    CHECK(f.values.maxCoeff() <= 4.1 + 1e-12);
  }
}

TEST_CASE("frequency draws cover the right boxes") {
  Rng rng = make_rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Vector2 w = sample_trig_omegas(rng);
    CHECK(w.minCoeff() >= 0.0);
    CHECK(w.maxCoeff() <= 7 * kPi / 4);
    Vector2 wo = sample_trig_omegas(rng, true);
    CHECK(wo.minCoeff() >= 7 * kPi / 4);
    CHECK(wo.maxCoeff() <= 2 * kPi);
  }
}

TEST_CASE("gp spectrum matches the analytic covariance") {
  CHECK(gp_mode_variance(1, 1, 9.0) ==
        doctest::Approx(0.0012107385889002413).epsilon(1e-13));
  CHECK(gp_mode_variance(1, 1, 9.0) ==
        doctest::Approx(std::pow(2 * kPi * kPi + 9.0, -2.0)).epsilon(1e-13));
  CHECK(gp_mode_variance(0, 0, 9.0) == doctest::Approx(1.0 / 81.0));
  CHECK(gp_mode_variance(0, 0, 16.0) == doctest::Approx(1.0 / 256.0));
  CHECK_THROWS_AS(gp_mode_variance(-1, 0, 9.0), DomainError);
  CHECK_THROWS_AS(gp_mode_variance(0, 0, 0.0), DomainError);

  // All cosine modes equal one at the origin, so the field value there has
  // variance equal to the summed spectrum. Monte Carlo check of the sampler.
  double expected = 0.0;
  for (int i = 0; i <= kGpMaxMode; ++i)
    for (int j = 0; j <= kGpMaxMode; ++j) expected += gp_mode_variance(i, j, 9.0);
  const int trials = 4000;
  double sum = 0.0, sumsq = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_rng(900 + t);
    GridField g = gp_sample(9.0, kGpMaxMode, rng, 2, 2);
    double v = g.at(0, 0);
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / trials;
  double var = sumsq / trials - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(var == doctest::Approx(expected).epsilon(0.10));
}

TEST_CASE("cutoff fields are two-phase and balanced") {
  double phase_sum = 0.0, value_sum = 0.0;
  const int seeds = 500;
  for (int s = 0; s < seeds; ++s) {
    Rng rng = make_rng(1234 + s);
    GridField raw = gp_sample(9.0, kGpMaxMode, rng, 29, 29);
    value_sum += raw.values.mean();
    GridField cut = threshold_field(raw);
    int hi = 0;
    for (Eigen::Index i = 0; i < cut.values.size(); ++i) {
      bool ok = cut.values[i] == 5.0 || cut.values[i] == 10.0;
      if (!ok) CHECK(ok);
      hi += cut.values[i] == 10.0;
    }
    phase_sum += static_cast<double>(hi) / cut.values.size();
  }
  CHECK(phase_sum / seeds == doctest::Approx(0.5).epsilon(0.04));
  CHECK(std::abs(value_sum / seeds) < 0.02);

  Rng rng = make_rng(5);
  GridField f = cutoff_gp_field(9.0, rng, 29, 29);
  CHECK(((f.values.array() == 5.0) || (f.values.array() == 10.0)).all());
}

TEST_CASE("gp draws are reproducible per seed") {
  Rng a = make_rng(42), b = make_rng(42), c = make_rng(43);
  GridField ga = gp_sample(9.0, kGpMaxMode, a, 29, 29);
  GridField gb = gp_sample(9.0, kGpMaxMode, b, 29, 29);
  GridField gc = gp_sample(9.0, kGpMaxMode, c, 29, 29);
  CHECK(ga.values == gb.values);
  CHECK(ga.values != gc.values);
}

TEST_CASE("eit conductivities") {
  Vector zero = Vector::Zero(1);
  GridField unit = sample_grid(eit_conductivity_fn(zero), 32, 32);
  CHECK(unit.values.minCoeff() == 1.0);
  CHECK(unit.values.maxCoeff() == 1.0);

  Vector one = Vector::Ones(1);
  auto gamma = eit_conductivity_fn(one);
  CHECK(gamma(0.5, 0.5) == doctest::Approx(2.718281828459045).epsilon(1e-14));

  CHECK_THROWS_AS(eit_conductivity_fn(Vector(0)), DomainError);
  CHECK_THROWS_AS(eit_conductivity_fn(Vector::Ones(6)), DomainError);

  Rng rng = make_rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    bool ood = trial % 2 == 1;
    Vector c = sample_eit_coeffs(rng, ood);
    CHECK(c.size() >= 1);
    CHECK(c.size() <= 5);
    if (ood) {
      CHECK(c.minCoeff() >= 1.0);
      CHECK(c.maxCoeff() <= 1.5);
    } else {
      CHECK(c.cwiseAbs().maxCoeff() <= 1.0);
    }
    GridField f = sample_grid(eit_conductivity_fn(c), 32, 32);
    CHECK(f.values.minCoeff() > 0.0);
  }
}

TEST_CASE("boundary voltage patterns") {
  auto g20 = boundary_voltage(20);
  auto g5 = boundary_voltage(5);
  for (double t : {0.0, 0.21, 0.5, 0.83, 1.0}) {
    for (double s : {0.0, 0.37, 1.0}) {
      CHECK(g20(t, s) == doctest::Approx(std::cos(2 * kPi * t)).epsilon(1e-13));
      CHECK(g5(s, t) == doctest::Approx(std::cos(2 * kPi * t)).epsilon(1e-13));
    }
  }
  for (int l = 1; l <= kNumVoltagePatterns; ++l)
    CHECK(boundary_voltage(l)(0.0, 0.0) == 1.0);
  CHECK_THROWS_AS(boundary_voltage(0), DomainError);
  CHECK_THROWS_AS(boundary_voltage(21), DomainError);
}

TEST_CASE("noise level calibration") {
  Vector ones = Vector::Ones(5);
  CHECK(noise_sigma(ones, 20.0) == doctest::Approx(0.1).epsilon(1e-12));

  Rng rng = make_rng(3);
  Vector clean = Vector::Ones(100000);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(add_noise(clean, inf, rng) == clean);

  for (double snr : {50.0, 25.0, 15.0}) {
    Vector noisy = add_noise(clean, snr, rng);
    double measured =
        10.0 * std::log10(clean.squaredNorm() / (noisy - clean).squaredNorm());
    CHECK(std::abs(measured - snr) < 0.2);
  }
}

TEST_CASE("noise errors and purity") {
  Rng rng = make_rng(9);
  CHECK_THROWS_AS(add_noise(Vector(0), 20.0, rng), ShapeError);
  CHECK_THROWS_AS(add_noise(Vector::Zero(4), 20.0, rng), DomainError);

  Vector clean = Vector::LinSpaced(16, -1.0, 1.0);
  Vector copy = clean;
  Vector noisy = add_noise(clean, 30.0, rng);
  CHECK(clean == copy);
  CHECK(noisy.size() == clean.size());
  CHECK(noisy != clean);
}

TEST_CASE("sensor placement facade") {
  SensorLayout b = place_sensors(SensorKind::boundary_equispaced, 128, 0);
  CHECK(b.count() == 128);
  int per_side[4] = {0, 0, 0, 0};
  for (int s : b.side) per_side[s]++;
  for (int s = 0; s < 4; ++s) CHECK(per_side[s] == 32);

  SensorLayout i1 = place_sensors(SensorKind::interior_random, 100, 15);
  SensorLayout i2 = place_sensors(SensorKind::interior_random, 100, 15);
  CHECK(i1.xy == i2.xy);
}
