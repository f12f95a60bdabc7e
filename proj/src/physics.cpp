#include "igno/physics.hpp"

#include <cmath>

#include "igno/csrbf.hpp"
#include "igno/error.hpp"
#include "igno/quadrature.hpp"

namespace igno {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_nodes(const TestParticleSet& ps, const Matrix& a, const Channels& u,
                 int min_order, const char* where) {
  if (a.cols() != ps.total_nodes() || u.v.cols() != ps.total_nodes())
    throw ShapeError(std::string(where) + ": node count mismatch");
  if (a.rows() != u.v.rows())
    throw ShapeError(std::string(where) + ": batch size mismatch");
  if (u.order < min_order)
    throw ShapeError(std::string(where) + ": solution jet order too low");
}

}  // namespace

TestParticleSet sample_particles(int count, double radius, Rng& rng, int n_radial,
                                 int n_angular) {
  if (count < 1) throw DomainError("sample_particles: need at least one particle");
  if (radius <= 0 || 2 * radius >= 1)
    throw DomainError("sample_particles: radius must fit inside the unit square");
  DiskQuadrature dq = disk_quadrature(radius, n_radial, n_angular);
  const int q = dq.size();

  TestParticleSet ps;
  ps.radius = radius;
  ps.count = count;
  ps.nodes_per = q;
  ps.znorm = radius * std::sqrt(7.0 * kPi / 99.0);
  ps.centers.resize(count, 2);
  ps.nodes.resize(2, count * q);
  ps.psi.resize(count * q);
  ps.psi_x.resize(count * q);
  ps.psi_y.resize(count * q);
  ps.qw.resize(count * q);

  for (int k = 0; k < count; ++k) {
    ps.centers(k, 0) = uniform_real(rng, radius, 1.0 - radius);
    ps.centers(k, 1) = uniform_real(rng, radius, 1.0 - radius);
    for (int j = 0; j < q; ++j) {
      const int idx = k * q + j;
      Vector2 d = dq.offsets.row(j);
      Vector2 grad;
      ps.psi[idx] = csrbf_eval(d, radius, &grad);
      ps.psi_x[idx] = grad[0];
      ps.psi_y[idx] = grad[1];
      ps.qw[idx] = dq.weights[j];
      ps.nodes(0, idx) = ps.centers(k, 0) + d[0];
      ps.nodes(1, idx) = ps.centers(k, 1) + d[1];
    }
  }
  return ps;
}

Matrix weak_residuals(const TestParticleSet& ps, const Matrix& a_nodes,
                      const Channels& u_nodes, double f_const) {
  check_nodes(ps, a_nodes, u_nodes, 1, "weak_residuals");
  const auto B = a_nodes.rows();
  const int K = ps.count, q = ps.nodes_per;

  ArrayXX g = (u_nodes.x.array().rowwise() * ps.psi_x.transpose().array() +
               u_nodes.y.array().rowwise() * ps.psi_y.transpose().array()) *
              a_nodes.array();
  g.rowwise() -= f_const * ps.psi.transpose().array();
  g.rowwise() *= ps.qw.transpose().array();

  Matrix r(B, K);
  for (int k = 0; k < K; ++k)
    r.col(k) = g.matrix().middleCols(static_cast<Eigen::Index>(k) * q, q).rowwise().sum();
  return r;
}

void weak_residual_adjoint(const TestParticleSet& ps, const Matrix& a_nodes,
                           const Channels& u_nodes, const Matrix& seed, Matrix& a_adj,
                           Channels& u_adj) {
  check_nodes(ps, a_nodes, u_nodes, 1, "weak_residual_adjoint");
  const auto B = a_nodes.rows();
  const int K = ps.count, q = ps.nodes_per;
  if (seed.rows() != B || seed.cols() != K)
    throw ShapeError("weak_residual_adjoint: seed shape mismatch");

  Matrix e(B, ps.total_nodes());
  for (int k = 0; k < K; ++k)
    e.middleCols(static_cast<Eigen::Index>(k) * q, q) = seed.col(k).replicate(1, q);
  e.array().rowwise() *= ps.qw.transpose().array();

  if (a_adj.size() == 0) a_adj = Matrix::Zero(B, ps.total_nodes());
  u_adj.order = std::max(u_adj.order, 1);
  if (u_adj.v.size() == 0) u_adj.v = Matrix::Zero(B, ps.total_nodes());
  if (u_adj.x.size() == 0) u_adj.x = Matrix::Zero(B, ps.total_nodes());
  if (u_adj.y.size() == 0) u_adj.y = Matrix::Zero(B, ps.total_nodes());

  a_adj.array() += e.array() * (u_nodes.x.array().rowwise() * ps.psi_x.transpose().array() +
                                u_nodes.y.array().rowwise() * ps.psi_y.transpose().array());
  ArrayXX ea = e.array() * a_nodes.array();
  u_adj.x.array() += ea.rowwise() * ps.psi_x.transpose().array();
  u_adj.y.array() += ea.rowwise() * ps.psi_y.transpose().array();
}

Matrix strong_residuals(const Channels& a, const Channels& u, double f_const) {
  if (a.order < 1 || u.order < 2)
    throw ShapeError("strong_residuals: need first-order a and second-order u jets");
  if (a.v.rows() != u.v.rows() || a.v.cols() != u.v.cols())
    throw ShapeError("strong_residuals: shape mismatch");
  Matrix r = (a.x.array() * u.x.array() + a.y.array() * u.y.array() +
              a.v.array() * (u.xx.array() + u.yy.array()) + f_const)
                 .matrix();
  return r;
}

void strong_residual_adjoint(const Channels& a, const Channels& u, const Matrix& seed,
                             Channels& a_adj, Channels& u_adj) {
  if (seed.rows() != a.v.rows() || seed.cols() != a.v.cols())
    throw ShapeError("strong_residual_adjoint: seed shape mismatch");
  auto acc = [&](Matrix& dst, const Matrix& term) {
    if (dst.size() == 0) dst = Matrix::Zero(seed.rows(), seed.cols());
    dst += term;
  };
  a_adj.order = std::max(a_adj.order, 1);
  u_adj.order = std::max(u_adj.order, 2);
  acc(a_adj.v, (seed.array() * (u.xx.array() + u.yy.array())).matrix());
  acc(a_adj.x, (seed.array() * u.x.array()).matrix());
  acc(a_adj.y, (seed.array() * u.y.array()).matrix());
  acc(u_adj.v, Matrix::Zero(seed.rows(), seed.cols()));
  acc(u_adj.x, (seed.array() * a.x.array()).matrix());
  acc(u_adj.y, (seed.array() * a.y.array()).matrix());
  acc(u_adj.xx, (seed.array() * a.v.array()).matrix());
  acc(u_adj.yy, (seed.array() * a.v.array()).matrix());
}

double residual_loss(const Matrix& r, double znorm, Matrix* r_adj) {
  if (r.size() == 0) throw ShapeError("residual_loss: empty residual matrix");
  if (znorm <= 0) throw DomainError("residual_loss: normalization must be positive");
  const double scale = 1.0 / (static_cast<double>(r.size()) * znorm * znorm);
  if (r_adj) *r_adj = 2.0 * scale * r;
  return scale * r.squaredNorm();
}

double mse_loss(const Matrix& pred, const Matrix& target, Matrix* pred_adj) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw ShapeError("mse_loss: shape mismatch");
  if (pred.size() == 0) throw ShapeError("mse_loss: empty input");
  const double inv = 1.0 / static_cast<double>(pred.size());
  Matrix d = pred - target;
  if (pred_adj) *pred_adj = 2.0 * inv * d;
  return inv * d.squaredNorm();
}

double bce_loss(const Matrix& prob, const Matrix& target, Matrix* prob_adj) {
  if (prob.rows() != target.rows() || prob.cols() != target.cols())
    throw ShapeError("bce_loss: shape mismatch");
  if (prob.size() == 0) throw ShapeError("bce_loss: empty input");
  const double eps = 1e-12;
  const double inv = 1.0 / static_cast<double>(prob.size());
  ArrayXX p = prob.array().min(1.0 - eps).max(eps);
  ArrayXX y = target.array();
  double loss = -inv * (y * p.log() + (1.0 - y) * (1.0 - p).log()).sum();
  if (prob_adj) *prob_adj = (inv * ((1.0 - y) / (1.0 - p) - y / p)).matrix();
  return loss;
}

}  // namespace igno
