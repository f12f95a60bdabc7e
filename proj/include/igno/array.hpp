#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "igno/error.hpp"

namespace igno {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Array = Eigen::ArrayXd;
using ArrayXX = Eigen::ArrayXXd;
using Vector2 = Eigen::Vector2d;

inline std::size_t shape_numel(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

// Dense n-d array of f64 values, row-major flattened. This is the exchange
// type at module boundaries (containers, datasets); numerics work on Eigen
// matrices directly.
struct DenseArray {
  std::vector<std::size_t> shape;
  Vector data;

  DenseArray() = default;
  DenseArray(std::vector<std::size_t> shape_, Vector data_)
      : shape(std::move(shape_)), data(std::move(data_)) {
    if (shape_numel(shape) != static_cast<std::size_t>(data.size()))
      throw ShapeError("DenseArray: shape " + shape_string() + " holds " +
                       std::to_string(shape_numel(shape)) +
                       " elements, got " + std::to_string(data.size()));
  }

  std::size_t numel() const { return static_cast<std::size_t>(data.size()); }

  std::string shape_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i)
      s += (i ? "," : "") + std::to_string(shape[i]);
    return s + "]";
  }
};

// Scalar field sampled on a uniform nx-by-ny grid over the closed unit
// square; node (ix, iy) sits at (ix/(nx-1), iy/(ny-1)). Values are stored
// row-major with iy as the slow index.
struct GridField {
  int nx = 0;
  int ny = 0;
  Vector values;

  GridField() = default;
  GridField(int nx_, int ny_) : nx(nx_), ny(ny_), values(Vector::Zero(static_cast<Eigen::Index>(nx_) * ny_)) {
    if (nx_ < 2 || ny_ < 2) throw ShapeError("GridField: need at least 2 nodes per axis");
  }

  double x(int ix) const { return static_cast<double>(ix) / (nx - 1); }
  double y(int iy) const { return static_cast<double>(iy) / (ny - 1); }

  double& at(int ix, int iy) { return values[static_cast<Eigen::Index>(iy) * nx + ix]; }
  double at(int ix, int iy) const { return values[static_cast<Eigen::Index>(iy) * nx + ix]; }

  // Bilinear interpolation; exact at nodes and for bilinear functions.
  double sample(double px, double py) const {
    check_inside(px, py);
    double gx = px * (nx - 1), gy = py * (ny - 1);
    int ix = std::min(static_cast<int>(gx), nx - 2);
    int iy = std::min(static_cast<int>(gy), ny - 2);
    double tx = gx - ix, ty = gy - iy;
    double v00 = at(ix, iy), v10 = at(ix + 1, iy);
    double v01 = at(ix, iy + 1), v11 = at(ix + 1, iy + 1);
    return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 +
           (1 - tx) * ty * v01 + tx * ty * v11;
  }

  // Gradient of the bilinear interpolant (piecewise linear per cell,
  // discontinuous across cell edges). Used for quadrature of reference
  // solutions, not anywhere differentiability matters.
  Vector2 sample_gradient(double px, double py) const {
    check_inside(px, py);
    double gx = px * (nx - 1), gy = py * (ny - 1);
    int ix = std::min(static_cast<int>(gx), nx - 2);
    int iy = std::min(static_cast<int>(gy), ny - 2);
    double tx = gx - ix, ty = gy - iy;
    double v00 = at(ix, iy), v10 = at(ix + 1, iy);
    double v01 = at(ix, iy + 1), v11 = at(ix + 1, iy + 1);
    double dx = ((1 - ty) * (v10 - v00) + ty * (v11 - v01)) * (nx - 1);
    double dy = ((1 - tx) * (v01 - v00) + tx * (v11 - v10)) * (ny - 1);
    return {dx, dy};
  }

  // Nearest-node lookup; ties resolve toward the larger index, matching
  // round-half-up on the fractional grid coordinate.
  double sample_nearest(double px, double py) const {
    check_inside(px, py);
    int ix = static_cast<int>(std::floor(px * (nx - 1) + 0.5));
    int iy = static_cast<int>(std::floor(py * (ny - 1) + 0.5));
    return at(std::min(ix, nx - 1), std::min(iy, ny - 1));
  }

  DenseArray to_array() const {
    return DenseArray({static_cast<std::size_t>(ny), static_cast<std::size_t>(nx)}, values);
  }

 private:
  void check_inside(double px, double py) const {
    constexpr double slack = 1e-12;
    if (px < -slack || px > 1 + slack || py < -slack || py > 1 + slack)
      throw DomainError("GridField sample at (" + std::to_string(px) + ", " +
                        std::to_string(py) + ") outside the unit square");
  }
};

inline void require_finite(const Eigen::Ref<const Vector>& v, const char* where) {
  if (!v.allFinite()) throw NumericError(where, "non-finite value");
}

}  // namespace igno
