#pragma once

#include "igno/array.hpp"
#include "igno/nn.hpp"
#include "igno/rng.hpp"

namespace igno {

// Compactly supported test functions for the weak-form residual: Wendland C2
// bumps at random interior centers, each integrated with the same product
// rule on its support disk. Node tables are flat with particle-major blocks.
struct TestParticleSet {
  Matrix centers;            // K x 2, drawn inside [R, 1-R]^2
  double radius = 0.0;
  Matrix nodes;              // 2 x (K*q)
  Vector psi, psi_x, psi_y;  // test-function tables at the nodes
  Vector qw;                 // quadrature weights, each block sums to pi R^2
  int count = 0;
  int nodes_per = 0;
  double znorm = 0.0;  // sqrt(int psi^2), shared by all particles

  int total_nodes() const { return count * nodes_per; }
};

TestParticleSet sample_particles(int count, double radius, Rng& rng, int n_radial = 4,
                                 int n_angular = 4);

// Weak residuals r(i, k) = sum_{j in k} qw_j [ a_ij (u_x psi_x + u_y psi_y)_ij
// - f psi_j ]. a_nodes is B x (K*q) coefficient values, u_nodes needs first
// derivatives at the same nodes.
Matrix weak_residuals(const TestParticleSet& ps, const Matrix& a_nodes,
                      const Channels& u_nodes, double f_const);

// Adjoint of sum_{ik} seed_ik r_ik, accumulated into a_adj and the x/y
// blocks of u_adj; both are zero-initialized when empty.
void weak_residual_adjoint(const TestParticleSet& ps, const Matrix& a_nodes,
                           const Channels& u_nodes, const Matrix& seed, Matrix& a_adj,
                           Channels& u_adj);

// Strong-form residual a_x u_x + a_y u_y + a (u_xx + u_yy) + f at scattered
// points; a needs first and u second derivatives.
Matrix strong_residuals(const Channels& a, const Channels& u, double f_const);
void strong_residual_adjoint(const Channels& a, const Channels& u, const Matrix& seed,
                             Channels& a_adj, Channels& u_adj);

// Mean square of normalized residuals, L = mean((r / znorm)^2).
double residual_loss(const Matrix& r, double znorm, Matrix* r_adj = nullptr);

// Mean-square mismatch, L = mean((pred - target)^2).
double mse_loss(const Matrix& pred, const Matrix& target, Matrix* pred_adj = nullptr);

// Bernoulli cross-entropy against {0,1} targets, averaged over entries;
// probabilities are clamped away from 0 and 1.
double bce_loss(const Matrix& prob, const Matrix& target, Matrix* prob_adj = nullptr);

}  // namespace igno
