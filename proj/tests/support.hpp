#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "igno/array.hpp"

// Shared finite-difference oracles for the test suite. These deliberately
// know nothing about the library's own differentiation machinery.
namespace testsup {

inline double fd_central(const std::function<double(double)>& f, double x,
                         double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

// Relative error with a unit floor so near-zero values are judged on an
// absolute scale instead of exploding.
inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::max(std::abs(got), std::abs(want)));
}

// Norm-wise relative disagreement between two gradient vectors.
inline double grad_rel_err(const igno::Vector& a, const igno::Vector& b) {
  double denom = std::max(1e-300, a.norm() + b.norm());
  return (a - b).norm() / denom;
}

// Central-difference gradient of a scalar function of a vector.
template <class F>
igno::Vector fd_gradient(F&& f, const igno::Vector& x, double h = 1e-5) {
  igno::Vector g(x.size());
  igno::Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double orig = xp[i];
    xp[i] = orig + h;
    double fp = f(xp);
    xp[i] = orig - h;
    double fm = f(xp);
    xp[i] = orig;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

}  // namespace testsup
