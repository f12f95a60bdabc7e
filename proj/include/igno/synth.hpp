#pragma once

#include <cstdint>

#include "igno/array.hpp"
#include "igno/oracle.hpp"
#include "igno/rng.hpp"

namespace igno {

// Synthetic input generators. Everything here is a pure function of its
// arguments (plus an explicit generator for the random families), so datasets
// are bit-reproducible from (seed, config).

// k(x,y) = 2.1 + sin(w1 x) + cos(w2 y).
ScalarFn trig_permeability_fn(double omega1, double omega2);

// Frequency draws: in-distribution U(0, 7pi/4)^2, out-of-distribution
// U(7pi/4, 2pi)^2.
Vector2 sample_trig_omegas(Rng& rng, bool out_of_dist = false);

// Evaluates fn at every node of an nx-by-ny grid over the unit square.
GridField sample_grid(const ScalarFn& fn, int nx, int ny);

constexpr int kGpMaxMode = 16;

// Variance of cosine mode (i,j) in the truncated spectral expansion of
// GP(0, (-Laplace + tau2 I)^{-2}) with Neumann modes cos(i pi x) cos(j pi y).
double gp_mode_variance(int i, int j, double tau2);

// One draw g = sum_{0<=i,j<=max_mode} xi_ij cos(i pi x) cos(j pi y) with
// xi_ij ~ N(0, gp_mode_variance(i,j,tau2)), drawn row-major in (i,j).
GridField gp_sample(double tau2, int max_mode, Rng& rng, int nx, int ny);

// Two-phase cutoff: hi where g > 0, lo elsewhere.
GridField threshold_field(const GridField& g, double lo = 5.0,
                          double hi = 10.0);

// gp_sample at the default truncation, thresholded to {5, 10}.
GridField cutoff_gp_field(double tau2, Rng& rng, int nx, int ny);

// gamma(x,y) = sum_{k=1..K} exp(c_k sin(k pi x) sin(k pi y)) with
// K = c.size(). Requires 1 <= K <= 5 and finite c.
ScalarFn eit_conductivity_fn(const Vector& c);

// K ~ U{1..5}; c_k ~ U[-1,1] in distribution, U[1,1.5] out of distribution.
Vector sample_eit_coeffs(Rng& rng, bool out_of_dist = false);

constexpr int kNumVoltagePatterns = 20;

// g_l(x,y) = cos(2 pi (x cos th_l + y sin th_l)), th_l = 2 pi l / 20,
// for l in 1..20.
ScalarFn boundary_voltage(int l);

// Noise level giving the requested signal-to-noise ratio:
// sigma^2 = mean(v^2) * 10^{-snr/10}.
double noise_sigma(const Vector& values, double snr_db);

// Additive white Gaussian noise at the given SNR. Returns a fresh vector and
// never touches the input; snr_db = +inf is the identity.
Vector add_noise(const Vector& values, double snr_db, Rng& rng);

enum class SensorKind { interior_random, boundary_equispaced };

SensorLayout place_sensors(SensorKind kind, int m, std::uint64_t seed);

}  // namespace igno
