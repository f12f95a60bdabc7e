#include "igno/mollifier.hpp"

#include <cmath>

#include "igno/error.hpp"

namespace igno {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_points(const Matrix& xy, const char* where) {
  if (xy.rows() != 2) throw ShapeError(std::string(where) + ": expected 2 x N points");
}

// A .* r with the single row r repeated over the rows of A.
Matrix rowmul(const Matrix& A, const Matrix& r) {
  return A.array().rowwise() * r.row(0).array();
}

}  // namespace

Channels bubble_jet(const Matrix& xy, int order) {
  check_points(xy, "bubble_jet");
  Channels m;
  m.order = order;
  Array sx = (kPi * xy.row(0).transpose().array()).sin();
  Array sy = (kPi * xy.row(1).transpose().array()).sin();
  m.v = (sx * sy).matrix().transpose();
  if (order >= 1) {
    Array cx = (kPi * xy.row(0).transpose().array()).cos();
    Array cy = (kPi * xy.row(1).transpose().array()).cos();
    m.x = (kPi * cx * sy).matrix().transpose();
    m.y = (kPi * sx * cy).matrix().transpose();
  }
  if (order >= 2) {
    m.xx = -kPi * kPi * m.v;
    m.yy = m.xx;
  }
  return m;
}

Channels voltage_jet(const Matrix& xy, int pattern, int num_patterns, int order) {
  check_points(xy, "voltage_jet");
  if (num_patterns < 1 || pattern < 1 || pattern > num_patterns)
    throw DomainError("voltage_jet: pattern index out of range");
  const double t = 2.0 * kPi * pattern / num_patterns;
  const double cx = std::cos(t), cy = std::sin(t);
  Array phase =
      2.0 * kPi * (cx * xy.row(0).transpose().array() + cy * xy.row(1).transpose().array());
  Channels g;
  g.order = order;
  g.v = phase.cos().matrix().transpose();
  if (order >= 1) {
    Matrix msin = phase.sin().matrix().transpose();
    g.x = -2.0 * kPi * cx * msin;
    g.y = -2.0 * kPi * cy * msin;
  }
  if (order >= 2) {
    g.xx = -(2.0 * kPi * cx) * (2.0 * kPi * cx) * g.v;
    g.yy = -(2.0 * kPi * cy) * (2.0 * kPi * cy) * g.v;
  }
  return g;
}

Channels voltage_jet_rows(const Matrix& xy, const std::vector<int>& pattern,
                          int num_patterns, int order) {
  const auto B = static_cast<Eigen::Index>(pattern.size());
  Channels g;
  g.order = order;
  g.v.resize(B, xy.cols());
  if (order >= 1) {
    g.x.resize(B, xy.cols());
    g.y.resize(B, xy.cols());
  }
  if (order >= 2) {
    g.xx.resize(B, xy.cols());
    g.yy.resize(B, xy.cols());
  }
  for (Eigen::Index i = 0; i < B; ++i) {
    Channels row = voltage_jet(xy, pattern[i], num_patterns, order);
    g.v.row(i) = row.v;
    if (order >= 1) {
      g.x.row(i) = row.x;
      g.y.row(i) = row.y;
    }
    if (order >= 2) {
      g.xx.row(i) = row.xx;
      g.yy.row(i) = row.yy;
    }
  }
  return g;
}

namespace {

// Add a boundary-data block to a composed channel; g may carry one shared
// row or one row per code.
void add_drive(Matrix& dst, const Matrix& g) {
  if (g.rows() == dst.rows())
    dst += g;
  else
    dst.array().rowwise() += g.row(0).array();
}

}  // namespace

void mollify(const Channels& G, const Channels& m, const Channels* g, Channels& u) {
  if (m.v.rows() != 1) throw ShapeError("mollify: mollifier jet must be a single row");
  if (g && g->v.rows() != 1 && g->v.rows() != G.v.rows())
    throw ShapeError("mollify: boundary jet must have one row or one per code");
  if (m.v.cols() != G.v.cols())
    throw ShapeError("mollify: point count mismatch");
  const int order = G.order;
  u.order = order;
  u.v = rowmul(G.v, m.v);
  if (g) add_drive(u.v, g->v);
  if (order >= 1) {
    u.x = rowmul(G.x, m.v) + rowmul(G.v, m.x);
    u.y = rowmul(G.y, m.v) + rowmul(G.v, m.y);
    if (g) {
      add_drive(u.x, g->x);
      add_drive(u.y, g->y);
    }
  }
  if (order >= 2) {
    u.xx = rowmul(G.xx, m.v) + 2.0 * rowmul(G.x, m.x) + rowmul(G.v, m.xx);
    u.yy = rowmul(G.yy, m.v) + 2.0 * rowmul(G.y, m.y) + rowmul(G.v, m.yy);
    if (g) {
      add_drive(u.xx, g->xx);
      add_drive(u.yy, g->yy);
    }
  }
}

void mollify_adjoint(const Channels& u_adj, const Channels& m, Channels& G_adj) {
  const int order = u_adj.order;
  G_adj.order = order;
  G_adj.v = rowmul(u_adj.v, m.v);
  if (order >= 1) {
    G_adj.v += rowmul(u_adj.x, m.x) + rowmul(u_adj.y, m.y);
    G_adj.x = rowmul(u_adj.x, m.v);
    G_adj.y = rowmul(u_adj.y, m.v);
  }
  if (order >= 2) {
    G_adj.v += rowmul(u_adj.xx, m.xx) + rowmul(u_adj.yy, m.yy);
    G_adj.x += 2.0 * rowmul(u_adj.xx, m.x);
    G_adj.y += 2.0 * rowmul(u_adj.yy, m.y);
    G_adj.xx = rowmul(u_adj.xx, m.v);
    G_adj.yy = rowmul(u_adj.yy, m.v);
  }
}

}  // namespace igno
