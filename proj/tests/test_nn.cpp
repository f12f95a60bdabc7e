#include <cmath>
#include <vector>

#include "doctest.h"
#include "igno/multionet.hpp"
#include "igno/nn.hpp"
#include "support.hpp"

using namespace igno;

TEST_CASE("ffcn value forward matches a hand-rolled network") {
  Ffcn net({2, 3, 1}, Act::tanh, Act::identity);
  CHECK(net.param_count() == 3 * 2 + 3 + 1 * 3 + 1);
  Vector p(net.param_count());
  Rng rng = make_rng(1);
  net.init(p, rng);
  CHECK(net.bias(p, 0).isZero());

  Matrix X(2, 4);
  X << 0.1, -0.4, 0.7, 0.0, 0.3, 0.9, -0.2, 0.0;
  FfcnTrace tr;
  net.forward(p, value_input(X), 0, tr, false);

  Matrix W0 = net.weight(p, 0), W1 = net.weight(p, 1);
  Vector b0 = net.bias(p, 0), b1 = net.bias(p, 1);
  for (int c = 0; c < 4; ++c) {
    Vector h = (W0 * X.col(c) + b0).array().tanh();
    double y = (W1 * h + b1)(0);
    CHECK(tr.out[2].v(0, c) == doctest::Approx(y).epsilon(1e-14));
  }
}

TEST_CASE("spatial jets agree with finite differences of the value pass") {
  for (Act act : {Act::tanh_sin, Act::silu_sin, Act::silu_id, Act::silu, Act::tanh}) {
    CAPTURE(act_name(act));
    Ffcn net({2, 7, 5, 3}, act, act);
    Vector p(net.param_count());
    Rng rng = make_rng(17);
    net.init(p, rng);

    Matrix xy(2, 3);
    xy << 0.3, 0.81, 0.5, 0.62, 0.25, 0.5;
    FfcnTrace tr;
    net.forward(p, point_input(xy, 2), 2, tr, false);

    auto value = [&](double px, double py, int row) {
      Matrix q(2, 1);
      q << px, py;
      FfcnTrace t;
      net.forward(p, point_input(q, 0), 0, t, false);
      return t.out[3].v(row, 0);
    };

    const double h = 1e-5;
    for (int c = 0; c < 3; ++c) {
      double x = xy(0, c), y = xy(1, c);
      for (int r = 0; r < 3; ++r) {
        double fdx = (value(x + h, y, r) - value(x - h, y, r)) / (2 * h);
        double fdy = (value(x, y + h, r) - value(x, y - h, r)) / (2 * h);
        double fdxx =
            (value(x + h, y, r) - 2 * value(x, y, r) + value(x - h, y, r)) / (h * h);
        double fdyy =
            (value(x, y + h, r) - 2 * value(x, y, r) + value(x, y - h, r)) / (h * h);
        CHECK(testsup::rel_err(tr.out[3].x(r, c), fdx) < 1e-6);
        CHECK(testsup::rel_err(tr.out[3].y(r, c), fdy) < 1e-6);
        CHECK(testsup::rel_err(tr.out[3].xx(r, c), fdxx) < 1e-4);
        CHECK(testsup::rel_err(tr.out[3].yy(r, c), fdyy) < 1e-4);
      }
    }
  }
}

TEST_CASE("ffcn parameter and input adjoints pass gradient checks") {
  for (int order : {0, 1, 2}) {
    CAPTURE(order);
    Ffcn net({2, 6, 4}, Act::tanh_sin, Act::silu_id);
    Vector p(net.param_count());
    Rng rng = make_rng(23 + order);
    net.init(p, rng);

    Matrix xy(2, 3);
    xy << 0.15, 0.6, 0.9, 0.45, 0.3, 0.75;

    // Random fixed cotangents per layer and channel make the probe generic.
    std::vector<Channels> seed(net.layers());
    Rng crng = make_rng(99 + order);
    auto rand_mat = [&](Eigen::Index r, Eigen::Index c) {
      Matrix m(r, c);
      for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = standard_normal(crng);
      return m;
    };
    for (int k = 0; k < net.layers(); ++k) {
      seed[k].order = order;
      seed[k].v = rand_mat(net.width(k), 3);
      if (order >= 1) {
        seed[k].x = rand_mat(net.width(k), 3);
        seed[k].y = rand_mat(net.width(k), 3);
      }
      if (order >= 2) {
        seed[k].xx = rand_mat(net.width(k), 3);
        seed[k].yy = rand_mat(net.width(k), 3);
      }
    }

    auto loss = [&](const Vector& params, const Matrix& pts) {
      FfcnTrace t;
      net.forward(params, point_input(pts, order), order, t, false);
      double s = 0;
      for (int k = 0; k < net.layers(); ++k) {
        s += (seed[k].v.array() * t.out[k + 1].v.array()).sum();
        if (order >= 1)
          s += (seed[k].x.array() * t.out[k + 1].x.array()).sum() +
               (seed[k].y.array() * t.out[k + 1].y.array()).sum();
        if (order >= 2)
          s += (seed[k].xx.array() * t.out[k + 1].xx.array()).sum() +
               (seed[k].yy.array() * t.out[k + 1].yy.array()).sum();
      }
      return s;
    };

    FfcnTrace tr;
    net.forward(p, point_input(xy, order), order, tr, true);
    Vector grad = Vector::Zero(net.param_count());
    Channels in_adj;
    net.backward(p, tr, seed, grad, &in_adj);

    Vector fd = testsup::fd_gradient([&](const Vector& q) { return loss(q, xy); }, p);
    CHECK(testsup::grad_rel_err(grad, fd) < 1e-6);

    // Input adjoint: perturb the coordinates.
    Matrix xflat = xy;
    Vector xvec = Eigen::Map<Vector>(xflat.data(), xflat.size());
    Vector fdx = testsup::fd_gradient(
        [&](const Vector& q) {
          Matrix pts = Eigen::Map<const Matrix>(q.data(), 2, 3);
          return loss(p, pts);
        },
        xvec);
    Vector got = Eigen::Map<Vector>(in_adj.v.data(), in_adj.v.size());
    CHECK(testsup::grad_rel_err(got, fdx) < 1e-6);
  }
}

TEST_CASE("multionet reduces to the exact formula on a single layer") {
  // Depth 1, identity activations: G(c)(x) = w1 <W_b c + b_b, W_t x + b_t> + b0.
  MultiOnet net(2, 2, 1, 3, Act::identity, Act::identity);
  Vector p(net.param_count());
  Rng rng = make_rng(3);
  net.init(p, rng);
  p.tail(2) << 2.0, 0.25;  // w1 = 2, b0 = 0.25

  Matrix codes(2, 2);
  codes << 0.5, -1.0, 0.125, 2.0;
  Matrix pts(2, 2);
  pts << 0.3, 0.7, 0.6, 0.2;

  FfcnTrace tt;
  net.trunk_forward(p, pts, 0, tt, false);
  MultiOnet::Trace tr;
  net.forward(p, codes, tt, tr, false);

  Matrix Wb = net.branch().weight(net.branch_params(p), 0);
  Matrix Wt = net.trunk().weight(net.trunk_params(p), 0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double expect = 2.0 * (Wb * codes.col(i)).dot(Wt * pts.col(j)) + 0.25;
      CHECK(tr.out.v(i, j) == doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("multionet output is linear in the mix weights") {
  MultiOnet net(3, 2, 4, 8, Act::tanh_sin, Act::tanh_sin);
  Vector p(net.param_count());
  Rng rng = make_rng(5);
  net.init(p, rng);
  Matrix codes = Matrix::Random(3, 2);
  Matrix pts(2, 3);
  pts << 0.1, 0.5, 0.9, 0.2, 0.8, 0.4;

  auto eval = [&](const Vector& q) {
    FfcnTrace tt;
    net.trunk_forward(q, pts, 0, tt, false);
    MultiOnet::Trace tr;
    net.forward(q, codes, tt, tr, false);
    return tr.out.v;
  };

  Matrix base = eval(p);
  Vector p2 = p;
  p2.segment(net.param_count() - 5, 4) *= 3.0;  // scale all w_k
  Matrix scaled = eval(p2);
  // b0 = 0 after init, so scaling the mix weights scales the output.
  CHECK((scaled - 3.0 * base).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("multionet adjoints pass gradient checks") {
  for (int order : {0, 1, 2}) {
    for (Act out_act : {Act::identity, Act::sigmoid}) {
      CAPTURE(order);
      CAPTURE(act_name(out_act));
      MultiOnet net(3, 2, 3, 5, Act::silu_id, Act::tanh_sin, out_act);
      Vector p(net.param_count());
      Rng rng = make_rng(31 + order);
      net.init(p, rng);
      // Nudge the mix weights off their all-ones initialization.
      p.segment(net.param_count() - 4, 3) << 1.3, 0.7, 1.1;

      Matrix codes = Matrix::Random(3, 2) * 0.8;
      Matrix pts(2, 3);
      pts << 0.15, 0.55, 0.95, 0.25, 0.85, 0.45;

      Channels cot;
      cot.order = order;
      Rng crng = make_rng(7);
      auto rand_mat = [&](Eigen::Index r, Eigen::Index c) {
        Matrix m(r, c);
        for (Eigen::Index i = 0; i < m.size(); ++i)
          m.data()[i] = standard_normal(crng);
        return m;
      };
      cot.v = rand_mat(2, 3);
      if (order >= 1) {
        cot.x = rand_mat(2, 3);
        cot.y = rand_mat(2, 3);
      }
      if (order >= 2) {
        cot.xx = rand_mat(2, 3);
        cot.yy = rand_mat(2, 3);
      }

      auto loss = [&](const Vector& q, const Matrix& cds) {
        FfcnTrace tt;
        net.trunk_forward(q, pts, order, tt, false);
        MultiOnet::Trace tr;
        net.forward(q, cds, tt, tr, false);
        double s = (cot.v.array() * tr.out.v.array()).sum();
        if (order >= 1)
          s += (cot.x.array() * tr.out.x.array()).sum() +
               (cot.y.array() * tr.out.y.array()).sum();
        if (order >= 2)
          s += (cot.xx.array() * tr.out.xx.array()).sum() +
               (cot.yy.array() * tr.out.yy.array()).sum();
        return s;
      };

      FfcnTrace tt;
      net.trunk_forward(p, pts, order, tt, true);
      MultiOnet::Trace tr;
      net.forward(p, codes, tt, tr, true);
      Vector grad = Vector::Zero(net.param_count());
      Matrix codes_adj;
      net.backward(p, tr, tt, cot, grad, &codes_adj);

      Vector fd = testsup::fd_gradient([&](const Vector& q) { return loss(q, codes); }, p);
      CHECK(testsup::grad_rel_err(grad, fd) < 1e-6);

      Vector cvec = Eigen::Map<Matrix>(codes.data(), codes.size(), 1);
      Vector fdc = testsup::fd_gradient(
          [&](const Vector& q) {
            Matrix cds = Eigen::Map<const Matrix>(q.data(), 3, 2);
            return loss(p, cds);
          },
          cvec);
      Vector got = Eigen::Map<Vector>(codes_adj.data(), codes_adj.size());
      CHECK(testsup::grad_rel_err(got, fdc) < 1e-6);

      // Frozen-parameter mode: code adjoints only, no gradient buffer.
      Matrix codes_adj2;
      net.backward(p, tr, tt, cot, no_grad(), &codes_adj2);
      CHECK(codes_adj2 == codes_adj);
    }
  }
}

TEST_CASE("zero-parameter multionet emits its bias") {
  MultiOnet net(2, 2, 2, 4, Act::tanh_sin, Act::tanh_sin);
  Vector p = Vector::Zero(net.param_count());
  p[net.param_count() - 1] = 0.75;  // b0
  Matrix codes = Matrix::Random(2, 3);
  Matrix pts(2, 2);
  pts << 0.4, 0.6, 0.5, 0.5;
  FfcnTrace tt;
  net.trunk_forward(p, pts, 1, tt, false);
  MultiOnet::Trace tr;
  net.forward(p, codes, tt, tr, false);
  // With zero weights every feature inner product collapses; only b0 is left.
  CHECK(tr.out.v.isConstant(0.75, 1e-15));
  CHECK(tr.out.x.isZero(1e-15));
}
