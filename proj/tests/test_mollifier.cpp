#include <cmath>

#include "doctest.h"
#include "igno/mollifier.hpp"
#include "igno/rng.hpp"
#include "igno/synth.hpp"
#include "support.hpp"

using namespace igno;

namespace {

constexpr double kPi = 3.14159265358979323846;

Matrix boundary_ring(int per_side) {
  Matrix xy(2, 4 * per_side);
  for (int i = 0; i < per_side; ++i) {
    double t = static_cast<double>(i) / per_side;
    xy.col(i) << t, 0.0;
    xy.col(per_side + i) << 1.0, t;
    xy.col(2 * per_side + i) << 1.0 - t, 1.0;
    xy.col(3 * per_side + i) << 0.0, 1.0 - t;
  }
  return xy;
}

}  // namespace

TEST_CASE("bubble jet has the right values and derivatives") {
  Matrix xy(2, 2);
  xy << 0.5, 0.25, 0.5, 0.5;
  Channels m = bubble_jet(xy, 2);
  CHECK(m.v(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.x(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(m.xx(0, 0) == doctest::Approx(-kPi * kPi).epsilon(1e-14));
  CHECK(m.v(0, 1) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(m.x(0, 1) == doctest::Approx(kPi * std::sqrt(0.5)).epsilon(1e-14));

  // Spot-check all jet channels against finite differences.
  Rng rng = make_rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    double x = uniform_real(rng, 0.1, 0.9), y = uniform_real(rng, 0.1, 0.9);
    Matrix q(2, 1);
    q << x, y;
    Channels j = bubble_jet(q, 2);
    auto f = [](double a, double b) { return std::sin(kPi * a) * std::sin(kPi * b); };
    const double h = 1e-6;
    CHECK(testsup::rel_err(j.x(0, 0), (f(x + h, y) - f(x - h, y)) / (2 * h)) < 1e-8);
    CHECK(testsup::rel_err(j.y(0, 0), (f(x, y + h) - f(x, y - h)) / (2 * h)) < 1e-8);
    CHECK(testsup::rel_err(j.xx(0, 0),
                           (f(x + h, y) - 2 * f(x, y) + f(x - h, y)) / (h * h)) < 1e-3);
  }
}

TEST_CASE("bubble vanishes on the boundary to machine precision") {
  Matrix ring = boundary_ring(100);
  Channels m = bubble_jet(ring, 0);
  CHECK(m.v.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("voltage jet matches the scalar drive and its derivatives") {
  Matrix xy(2, 3);
  xy << 0.0, 0.3, 0.8, 0.0, 0.7, 0.2;
  for (int l : {1, 5, 12, 20}) {
    Channels g = voltage_jet(xy, l, kNumVoltagePatterns, 2);
    auto fn = boundary_voltage(l);
    for (int c = 0; c < 3; ++c) {
      double x = xy(0, c), y = xy(1, c);
      CHECK(g.v(0, c) == doctest::Approx(fn(x, y)).epsilon(1e-14));
      const double h = 1e-6, h2 = 1e-4;
      CHECK(testsup::rel_err(g.x(0, c), (fn(x + h, y) - fn(x - h, y)) / (2 * h)) < 1e-8);
      CHECK(testsup::rel_err(g.y(0, c), (fn(x, y + h) - fn(x, y - h)) / (2 * h)) < 1e-8);
      CHECK(testsup::rel_err(g.xx(0, c),
                             (fn(x + h2, y) - 2 * fn(x, y) + fn(x - h2, y)) / (h2 * h2)) <
            1e-5);
      CHECK(testsup::rel_err(g.yy(0, c),
                             (fn(x, y + h2) - 2 * fn(x, y) + fn(x, y - h2)) / (h2 * h2)) <
            1e-5);
    }
  }
  CHECK_THROWS(voltage_jet(xy, 0, 20, 0));
  CHECK_THROWS(voltage_jet(xy, 21, 20, 0));
}

TEST_CASE("mollified fields reproduce the product rule") {
  // G(x, y) = x^2 + y gives a closed-form jet to compose with.
  Matrix xy(2, 4);
  xy << 0.2, 0.5, 0.7, 0.9, 0.3, 0.5, 0.1, 0.8;
  Channels G;
  G.order = 2;
  G.v = (xy.row(0).array().square() + xy.row(1).array()).matrix();
  G.x = 2.0 * xy.row(0);
  G.y = Matrix::Ones(1, 4);
  G.xx = Matrix::Constant(1, 4, 2.0);
  G.yy = Matrix::Zero(1, 4);

  Channels m = bubble_jet(xy, 2);
  Channels g = voltage_jet(xy, 3, 20, 2);
  Channels u;
  mollify(G, m, &g, u);

  auto fG = [](double x, double y) { return x * x + y; };
  auto fm = [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); };
  auto fg = boundary_voltage(3);
  auto fu = [&](double x, double y) { return fG(x, y) * fm(x, y) + fg(x, y); };
  const double h = 1e-5;
  for (int c = 0; c < 4; ++c) {
    double x = xy(0, c), y = xy(1, c);
    CHECK(u.v(0, c) == doctest::Approx(fu(x, y)).epsilon(1e-13));
    CHECK(testsup::rel_err(u.x(0, c), (fu(x + h, y) - fu(x - h, y)) / (2 * h)) < 1e-8);
    CHECK(testsup::rel_err(u.y(0, c), (fu(x, y + h) - fu(x, y - h)) / (2 * h)) < 1e-8);
    CHECK(testsup::rel_err(u.xx(0, c),
                           (fu(x + h, y) - 2 * fu(x, y) + fu(x - h, y)) / (h * h)) < 1e-4);
    CHECK(testsup::rel_err(u.yy(0, c),
                           (fu(x, y + h) - 2 * fu(x, y) + fu(x, y - h)) / (h * h)) < 1e-4);
  }
}

TEST_CASE("mollification takes the value exactly on the boundary") {
  Matrix ring = boundary_ring(100);
  Channels G;
  G.order = 0;
  Rng rng = make_rng(9);
  G.v.resize(3, ring.cols());
  for (Eigen::Index i = 0; i < G.v.size(); ++i) G.v.data()[i] = standard_normal(rng);

  Channels m = bubble_jet(ring, 0);
  Channels g = voltage_jet(ring, 7, 20, 0);
  Channels u;
  mollify(G, m, &g, u);
  for (int r = 0; r < 3; ++r)
    CHECK((u.v.row(r) - g.v.row(0)).cwiseAbs().maxCoeff() < 1e-14);

  Channels u0;
  mollify(G, m, nullptr, u0);
  CHECK(u0.v.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("mollify adjoint satisfies the inner-product identity") {
  Rng rng = make_rng(15);
  auto rand_mat = [&](Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = standard_normal(rng);
    return m;
  };
  Matrix xy = Matrix::Random(2, 6).cwiseAbs();
  Channels m = bubble_jet(xy, 2);

  Channels G, ubar;
  G.order = ubar.order = 2;
  for (Channels* ch : {&G, &ubar}) {
    ch->v = rand_mat(4, 6);
    ch->x = rand_mat(4, 6);
    ch->y = rand_mat(4, 6);
    ch->xx = rand_mat(4, 6);
    ch->yy = rand_mat(4, 6);
  }

  Channels u, Gbar;
  mollify(G, m, nullptr, u);
  mollify_adjoint(ubar, m, Gbar);

  double lhs = (ubar.v.array() * u.v.array()).sum() +
               (ubar.x.array() * u.x.array()).sum() +
               (ubar.y.array() * u.y.array()).sum() +
               (ubar.xx.array() * u.xx.array()).sum() +
               (ubar.yy.array() * u.yy.array()).sum();
  double rhs = (Gbar.v.array() * G.v.array()).sum() +
               (Gbar.x.array() * G.x.array()).sum() +
               (Gbar.y.array() * G.y.array()).sum() +
               (Gbar.xx.array() * G.xx.array()).sum() +
               (Gbar.yy.array() * G.yy.array()).sum();
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}
