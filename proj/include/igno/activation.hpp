#pragma once

#include <cmath>
#include <string>

#include "igno/array.hpp"
#include "igno/error.hpp"

namespace igno {

// Activation set used across every network in the toolkit. The sin-warped
// variants compose g(sin(pi*x + pi)) with an identity skip, which keeps them
// smooth, non-periodic and free of dead regions.
enum class Act { tanh_sin, silu_sin, silu_id, silu, tanh, sigmoid, identity };

inline double sigmoid(double x) {
  if (x >= 0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

inline double silu(double x) { return x * sigmoid(x); }
inline double tanh_sin(double x) { return std::tanh(std::sin(M_PI * x + M_PI)) + x; }
inline double silu_sin(double x) { return silu(std::sin(M_PI * x + M_PI)) + x; }
inline double silu_id(double x) { return silu(x) + x; }

// Value and the first three derivatives at one point. Everything downstream
// (spatial jets, parameter adjoints, second-order residuals) is assembled
// from these; each entry is checked against finite differences in the tests.
struct ActDerivs {
  double d0 = 0, d1 = 0, d2 = 0, d3 = 0;
};

namespace detail {

inline ActDerivs sigmoid_derivs(double x) {
  double s = sigmoid(x);
  double s1 = s * (1 - s);
  ActDerivs r;
  r.d0 = s;
  r.d1 = s1;
  r.d2 = s1 * (1 - 2 * s);
  r.d3 = s1 * (1 - 6 * s + 6 * s * s);
  return r;
}

inline ActDerivs silu_derivs(double x) {
  ActDerivs g = sigmoid_derivs(x);
  ActDerivs r;
  r.d0 = x * g.d0;
  r.d1 = g.d0 + x * g.d1;
  r.d2 = 2 * g.d1 + x * g.d2;
  r.d3 = 3 * g.d2 + x * g.d3;
  return r;
}

inline ActDerivs tanh_derivs(double x) {
  double t = std::tanh(x);
  double m = 1 - t * t;
  ActDerivs r;
  r.d0 = t;
  r.d1 = m;
  r.d2 = -2 * t * m;
  r.d3 = -2 * m * (1 - 3 * t * t);
  return r;
}

// g(sin(pi*x + pi)) + x via the chain rule on u(x) = pi*x + pi.
inline ActDerivs sin_warp(const ActDerivs& g, double u, double x) {
  double su = std::sin(u), cu = std::cos(u);
  double s1 = M_PI * cu;          // d/dx sin(u)
  double s2 = -M_PI * M_PI * su;  // d2
  double s3 = -M_PI * M_PI * M_PI * cu;
  ActDerivs r;
  r.d0 = g.d0 + x;
  r.d1 = g.d1 * s1 + 1.0;
  r.d2 = g.d2 * s1 * s1 + g.d1 * s2;
  r.d3 = g.d3 * s1 * s1 * s1 + 3 * g.d2 * s1 * s2 + g.d1 * s3;
  return r;
}

}  // namespace detail

inline ActDerivs act_derivs(Act act, double x) {
  switch (act) {
    case Act::tanh_sin: {
      double u = M_PI * x + M_PI;
      return detail::sin_warp(detail::tanh_derivs(std::sin(u)), u, x);
    }
    case Act::silu_sin: {
      double u = M_PI * x + M_PI;
      return detail::sin_warp(detail::silu_derivs(std::sin(u)), u, x);
    }
    case Act::silu_id: {
      ActDerivs r = detail::silu_derivs(x);
      r.d0 += x;
      r.d1 += 1.0;
      return r;
    }
    case Act::silu:
      return detail::silu_derivs(x);
    case Act::tanh:
      return detail::tanh_derivs(x);
    case Act::sigmoid:
      return detail::sigmoid_derivs(x);
    case Act::identity: {
      ActDerivs r;
      r.d0 = x;
      r.d1 = 1.0;
      return r;
    }
  }
  throw ConfigError("unknown activation");
}

inline double act_value(Act act, double x) { return act_derivs(act, x).d0; }

// Fills value/derivative arrays for a whole pre-activation block at once.
// Pass nullptr for orders the caller does not need.
inline void act_derivs(Act act, const ArrayXX& s, ArrayXX* d0, ArrayXX* d1,
                       ArrayXX* d2 = nullptr, ArrayXX* d3 = nullptr) {
  auto rows = s.rows(), cols = s.cols();
  if (d0) d0->resize(rows, cols);
  if (d1) d1->resize(rows, cols);
  if (d2) d2->resize(rows, cols);
  if (d3) d3->resize(rows, cols);
  const double* in = s.data();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    ActDerivs r = act_derivs(act, in[i]);
    if (d0) d0->data()[i] = r.d0;
    if (d1) d1->data()[i] = r.d1;
    if (d2) d2->data()[i] = r.d2;
    if (d3) d3->data()[i] = r.d3;
  }
}

inline std::string act_name(Act act) {
  switch (act) {
    case Act::tanh_sin: return "tanh_sin";
    case Act::silu_sin: return "silu_sin";
    case Act::silu_id: return "silu_id";
    case Act::silu: return "silu";
    case Act::tanh: return "tanh";
    case Act::sigmoid: return "sigmoid";
    case Act::identity: return "identity";
  }
  throw ConfigError("unknown activation");
}

inline Act act_from_name(const std::string& name) {
  if (name == "tanh_sin") return Act::tanh_sin;
  if (name == "silu_sin") return Act::silu_sin;
  if (name == "silu_id") return Act::silu_id;
  if (name == "silu") return Act::silu;
  if (name == "tanh") return Act::tanh;
  if (name == "sigmoid") return Act::sigmoid;
  if (name == "identity") return Act::identity;
  throw ConfigError("unknown activation '" + name + "'");
}

}  // namespace igno
