#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "igno/baseline.hpp"
#include "igno/error.hpp"
#include "support.hpp"

using namespace igno;

namespace {

PidionsConfig tiny_config(const std::string& problem) {
  PidionsConfig c = PidionsConfig::for_problem(problem, 6);
  c.grid = 7;
  c.sol_depth = 2;
  c.sol_width = 8;
  c.coef_depth = 2;
  c.coef_width = 8;
  c.colloc_interior = 24;
  c.colloc_boundary = 12;
  return c;
}

Matrix scatter_points(int n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Matrix pts(2, n);
  for (int i = 0; i < n; ++i) {
    pts(0, i) = uniform_real(rng, 0.05, 0.95);
    pts(1, i) = uniform_real(rng, 0.05, 0.95);
  }
  return pts;
}

Dataset tiny_dataset(int n, bool with_solutions) {
  GenConfig gc;
  gc.problem = "darcy-continuous";
  gc.n_samples = n;
  gc.grid = 7;
  gc.seed = 3;
  gc.with_solutions = with_solutions;
  gc.oracle_n = 15;
  gc.n_sensors = 6;
  return generate_dataset(gc);
}

}  // namespace

TEST_CASE("baseline config mirrors the decoder families and rejects misuse") {
  PidionsConfig c = PidionsConfig::for_problem("darcy-continuous", 100);
  CHECK(c.sensors == 100);
  CHECK(c.sol_depth == 6);
  CHECK(c.sol_width == 100);
  CHECK(c.coef_depth == 6);
  CHECK(c.coef_width == 100);
  CHECK(c.sol_act == Act::tanh_sin);
  CHECK(c.lambda_physics == 1.0);
  CHECK(c.lambda_data == 2.0);
  CHECK(c.colloc_interior == 400);

  PidionsConfig p = PidionsConfig::for_problem("darcy-piecewise", 100);
  CHECK(p.sol_depth == 5);
  CHECK(p.coef_depth == 5);
  CHECK(p.coef_width == 256);
  CHECK(p.coef_trunk_act == Act::silu_sin);
  CHECK(p.coef_branch_act == Act::silu_id);
  CHECK(p.threshold == 7.5);
  CHECK(p.phase_lo == 5.0);
  CHECK(p.phase_hi == 10.0);

  CHECK_THROWS_AS(PidionsConfig::for_problem("eit", 128), ConfigError);
  CHECK_THROWS_AS(PidionsConfig::for_problem("poisson", 10), ConfigError);

  Json j = p.to_json();
  PidionsConfig back = PidionsConfig::from_json(j);
  CHECK(back.to_json() == j);

  PidionsConfig bad = tiny_config("darcy-continuous");
  bad.sensors = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = tiny_config("darcy-continuous");
  bad.lambda_data = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = tiny_config("darcy-continuous");
  bad.colloc_boundary = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("baseline composite loss is exact on the idle model") {
  // Zero parameters pin every prediction at zero, so each term is known in
  // closed form: the data and boundary misfits vanish with zero readings and
  // the residual reduces to the constant source.
  PidionsModel model(tiny_config("darcy-continuous"));
  Vector params = Vector::Zero(model.param_count());
  Matrix meas = Matrix::Zero(3, 6);
  Matrix interior = scatter_points(24, 1);
  Matrix boundary = scatter_points(12, 2);
  Matrix sensor_pts = scatter_points(6, 3);

  Vector grad;
  PidionsModel::BatchLoss parts =
      model.batch_loss(params, meas, interior, boundary, sensor_pts, grad);
  CHECK(parts.data == 0.0);
  CHECK(parts.bd == 0.0);
  CHECK(parts.pde == doctest::Approx(100.0).epsilon(1e-15));
  CHECK(parts.total == doctest::Approx(100.0).epsilon(1e-15));
}

TEST_CASE("baseline loss gradient matches finite differences") {
  PidionsModel model(tiny_config("darcy-continuous"));
  Vector params;
  Rng rng = make_rng(21);
  model.init(params, rng);
  Rng mrng = make_rng(22);
  Matrix meas(3, 6);
  for (Eigen::Index i = 0; i < meas.size(); ++i)
    meas.data()[i] = 0.3 * standard_normal(mrng);
  Matrix interior = scatter_points(7, 4);
  Matrix boundary = scatter_points(6, 5);
  Matrix sensor_pts = scatter_points(6, 6);

  Vector grad = Vector::Zero(params.size());
  PidionsModel::BatchLoss parts =
      model.batch_loss(params, meas, interior, boundary, sensor_pts, grad);
  CHECK(parts.total ==
        doctest::Approx(1.0 * (parts.pde + parts.bd) + 2.0 * parts.data)
            .epsilon(1e-14));

  Vector fd = testsup::fd_gradient(
      [&](const Vector& p) {
        return model
            .batch_loss(p, meas, interior, boundary, sensor_pts, no_grad())
            .total;
      },
      params);
  CHECK(testsup::grad_rel_err(grad, fd) < 1e-6);

  SUBCASE("shape guards") {
    Vector short_grad = Vector::Zero(3);
    CHECK_THROWS_AS(
        model.batch_loss(params, meas, interior, boundary, sensor_pts, short_grad),
        ShapeError);
    Matrix wide = Matrix::Zero(3, 7);
    CHECK_THROWS_AS(model.batch_loss(params, wide, interior, boundary, sensor_pts,
                                     no_grad()),
                    ShapeError);
    CHECK_THROWS_AS(model.coefficient_values(params, wide, interior), ShapeError);
  }
}

TEST_CASE("baseline training fits sensor readings on a smoke problem") {
  Dataset data = tiny_dataset(16, true);
  PidionsConfig cfg = tiny_config("darcy-continuous");
  TrainConfig tc;
  tc.epochs = 40;
  tc.batch = 8;
  tc.lr = 3e-3;
  tc.particles = 1;  // unused by the baseline, still validated
  tc.particle_radius = 0.1;
  tc.seed = 9;
  tc.checkpoint_every = 0;
  tc.loss_csv = "pidions_loss_test.csv";

  TrainResult res;
  PidionsBundle bundle = pidions_train(data, cfg, tc, &res);
  CHECK(res.epochs_run == 40);
  CHECK(!res.diverged);
  CHECK(std::isfinite(res.best_loss));

  std::ifstream csv(tc.loss_csv);
  REQUIRE(csv.good());
  std::string line;
  std::getline(csv, line);
  CHECK(line == "epoch,lr,total,pde,bd,data");
  double first_total = 0;
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    if (rows == 1) std::sscanf(line.c_str(), "%*d,%*lf,%lf", &first_total);
  }
  CHECK(rows == 40);
  CHECK(res.best_loss < 0.5 * first_total);
  std::remove(tc.loss_csv.c_str());

  CHECK(bundle.params.size() == PidionsModel(cfg).param_count());
  CHECK(bundle.sensors.xy == data.sensors.xy);

  SUBCASE("prediction is a deterministic forward pass") {
    Vector reading = data.measurements().row(0).transpose();
    PidionsPrediction a = pidions_predict(bundle, reading);
    PidionsPrediction b = pidions_predict(bundle, reading);
    CHECK(a.coefficient.nx == cfg.grid);
    CHECK(a.coefficient.values == b.coefficient.values);
    CHECK(a.solution.values == b.solution.values);
    CHECK(a.coefficient.values.allFinite());

    Vector wrong = Vector::Zero(5);
    CHECK_THROWS_AS(pidions_predict(bundle, wrong), ShapeError);
  }

  SUBCASE("bundle round trip is exact") {
    save_pidions(bundle, "pidions_test.bin");
    PidionsBundle back = load_pidions("pidions_test.bin");
    CHECK(back.params == bundle.params);
    CHECK(back.config.to_json() == bundle.config.to_json());
    CHECK(back.sensors.xy == bundle.sensors.xy);
    CHECK(back.sensors.side == bundle.sensors.side);
    std::remove("pidions_test.bin");
  }

  SUBCASE("training rejects mismatched or unsupervised data") {
    Dataset blind = tiny_dataset(4, false);
    CHECK_THROWS_AS(pidions_train(blind, cfg, tc), ConfigError);

    PidionsConfig wrong = cfg;
    wrong.problem = "darcy-piecewise";
    CHECK_THROWS_AS(pidions_train(data, wrong, tc), ConfigError);

    PidionsConfig fat = cfg;
    fat.sensors = 7;
    CHECK_THROWS_AS(pidions_train(data, fat, tc), ConfigError);
  }

  SUBCASE("coefficient access flags wall off the supervised channels") {
    save_dataset(data, "pidions_data_test.bin");
    Dataset guarded = load_dataset("pidions_data_test.bin",
                                   DatasetAccess::coefficients_only);
    CHECK_THROWS_AS(pidions_train(guarded, cfg, tc), ConfigError);
    std::remove("pidions_data_test.bin");
  }
}

TEST_CASE("piecewise baseline predicts raw values split at the threshold") {
  PidionsConfig cfg = tiny_config("darcy-piecewise");
  PidionsModel model(cfg);
  PidionsBundle bundle;
  bundle.config = cfg;
  Rng rng = make_rng(41);
  model.init(bundle.params, rng);
  bundle.sensors = place_interior_sensors(6, 42);

  Vector reading(6);
  reading << 0.2, -0.1, 0.4, 0.0, 0.3, -0.2;
  PidionsPrediction pred = pidions_predict(bundle, reading, 9);
  Matrix raw = model.coefficient_values(bundle.params, reading.transpose(),
                                        grid_points(9));
  for (Eigen::Index i = 0; i < pred.coefficient.values.size(); ++i) {
    const double want = raw(0, i) > 7.5 ? 10.0 : 5.0;
    CHECK(pred.coefficient.values[i] == want);
  }

  // An idle decoder sits below the threshold everywhere.
  Vector zero = Vector::Zero(bundle.params.size());
  PidionsBundle idle = bundle;
  idle.params = zero;
  PidionsPrediction flat = pidions_predict(idle, reading, 5);
  CHECK(flat.coefficient.values.minCoeff() == 5.0);
  CHECK(flat.coefficient.values.maxCoeff() == 5.0);
}
