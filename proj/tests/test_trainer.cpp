#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "igno/error.hpp"
#include "igno/trainer.hpp"
#include "support.hpp"

using namespace igno;

namespace {

ModelConfig tiny_model(const std::string& problem) {
  ModelConfig c = ModelConfig::for_problem(problem);
  c.grid = problem == "eit" ? 8 : 7;
  c.latent = 4;
  c.conv_channels = {2};
  c.enc_hidden = {6};
  c.sol_depth = 2;
  c.sol_width = 8;
  c.coef_depth = 2;
  c.coef_width = 8;
  if (problem == "eit") c.patterns = 3;
  return c;
}

Dataset tiny_data(const std::string& problem, int n, int grid, std::uint64_t seed) {
  GenConfig g;
  g.problem = problem;
  g.n_samples = n;
  g.grid = grid;
  g.seed = seed;
  return generate_dataset(g);
}

TrainConfig quick_config() {
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch = 4;
  cfg.lr = 1e-3;
  cfg.particles = 12;
  cfg.particle_radius = 0.1;
  cfg.checkpoint_every = 0;
  cfg.seed = 5;
  return cfg;
}

int count_lines(const std::string& path) {
  std::ifstream in(path);
  int n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

}  // namespace

TEST_CASE("adam follows the bias-corrected moment recursion") {
  const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Vector p = Vector::Constant(3, 1.0);
  Adam opt(3);

  // First step from zero state: m_hat = g, v_hat = g * g.
  Vector g(3);
  g << 3.0, -2.0, 0.5;
  opt.step(p, g, lr);
  for (int i = 0; i < 3; ++i) {
    const double want = 1.0 - lr * g[i] / (std::abs(g[i]) + eps);
    CHECK(p[i] == doctest::Approx(want).epsilon(1e-14));
  }

  // Later steps against an independent copy of the recursion.
  Vector m = (1 - b1) * g, v = (1 - b2) * g.cwiseAbs2();
  Vector q = p;
  for (int t = 2; t <= 4; ++t) {
    Vector gt(3);
    gt << std::sin(1.0 * t), std::cos(2.0 * t), 0.1 * t;
    m = b1 * m + (1 - b1) * gt;
    v = b2 * v + (1 - b2) * gt.cwiseAbs2();
    Vector mh = m / (1 - std::pow(b1, t));
    Vector vh = v / (1 - std::pow(b2, t));
    q -= (lr * mh.array() / (vh.array().sqrt() + eps)).matrix();
    opt.step(p, gt, lr);
    CHECK(testsup::grad_rel_err(p, q) < 1e-14);
  }
  CHECK(opt.steps() == 4);

  Vector bad(2);
  CHECK_THROWS_AS(opt.step(p, bad, lr), ShapeError);
}

TEST_CASE("adam minimizes a separable quadratic") {
  Vector c(4), d(4);
  c << 0.3, -1.2, 2.0, 0.05;
  d << 0.5, 1.0, 2.0, 3.0;
  Vector x = Vector::Zero(4);
  Adam opt(4);
  for (int t = 0; t < 5000; ++t) {
    Vector g = d.cwiseProduct(x - c);
    opt.step(x, g, 0.05);
  }
  CHECK((x - c).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("stepped learning rate decays on epoch boundaries") {
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.lr_factor = 0.5;
  cfg.lr_period = 2500;
  CHECK(lr_at(cfg, 1) == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(lr_at(cfg, 2499) == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(lr_at(cfg, 2500) == doctest::Approx(5e-4).epsilon(1e-15));
  CHECK(lr_at(cfg, 4999) == doctest::Approx(5e-4).epsilon(1e-15));
  CHECK(lr_at(cfg, 5000) == doctest::Approx(2.5e-4).epsilon(1e-15));

  cfg.lr = 0.01;
  cfg.lr_factor = 2.0 / 3.0;
  cfg.lr_period = 250;
  CHECK(lr_at(cfg, 250) == doctest::Approx(0.01 * 2.0 / 3.0).epsilon(1e-15));
  CHECK(lr_at(cfg, 500) == doctest::Approx(0.01 * 4.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("shuffle produces seeded permutations") {
  std::vector<int> idx(10);
  for (int i = 0; i < 10; ++i) idx[i] = i;
  Rng rng = make_rng(7, 0x5a11f);
  shuffle_indices(idx, rng);

  std::vector<int> seen(10, 0);
  for (int v : idx) {
    REQUIRE(v >= 0);
    REQUIRE(v < 10);
    ++seen[v];
  }
  for (int s : seen) CHECK(s == 1);

  std::vector<int> again(10);
  for (int i = 0; i < 10; ++i) again[i] = i;
  Rng rng2 = make_rng(7, 0x5a11f);
  shuffle_indices(again, rng2);
  CHECK(again == idx);

  // A fresh draw from the same stream keeps permuting.
  std::vector<int> next = idx;
  shuffle_indices(next, rng);
  CHECK(next != idx);

  std::vector<int> one = {42};
  shuffle_indices(one, rng);
  CHECK(one[0] == 42);
}

TEST_CASE("train config validates and survives json") {
  TrainConfig cfg = quick_config();
  cfg.clip = true;
  cfg.clip_norm = 5.0;
  TrainConfig back = TrainConfig::from_json(cfg.to_json());
  CHECK(back.epochs == cfg.epochs);
  CHECK(back.batch == cfg.batch);
  CHECK(back.lr == cfg.lr);
  CHECK(back.clip == cfg.clip);
  CHECK(back.particles == cfg.particles);
  CHECK(back.seed == cfg.seed);

  TrainConfig bad = quick_config();
  bad.epochs = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = quick_config();
  bad.particle_radius = 0.6;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = quick_config();
  bad.divergence_factor = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("training runs deterministically and logs its trace") {
  IgnoModel model(tiny_model("darcy-continuous"));
  Dataset data = tiny_data("darcy-continuous", 6, 7, 11);

  TrainConfig cfg = quick_config();
  cfg.checkpoint_every = 2;
  cfg.checkpoint_dir = "/tmp/igno_trainer_ckpt";
  cfg.loss_csv = "/tmp/igno_trainer_loss.csv";
  std::filesystem::remove_all(cfg.checkpoint_dir);
  std::remove(cfg.loss_csv.c_str());

  Rng rng = make_rng(1, 2);
  Vector p0;
  model.init(p0, rng);

  Vector p1 = p0;
  TrainResult res = train_model(model, p1, data, cfg);
  CHECK(res.epochs_run == 3);
  CHECK_FALSE(res.diverged);
  CHECK(std::isfinite(res.last.total));
  CHECK(res.last.total > 0);
  CHECK(res.best_loss <= res.last.total);
  CHECK(res.best_epoch >= 1);
  CHECK((p1 - p0).norm() > 0);

  // Bit-identical replay from the same starting point.
  Vector p2 = p0;
  TrainResult res2 = train_model(model, p2, data, cfg);
  CHECK((p1.array() == p2.array()).all());
  CHECK(res2.best_loss == res.best_loss);

  CHECK(count_lines(cfg.loss_csv) == 4);
  std::ifstream in(cfg.loss_csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "epoch,lr,total,pde,bd,rec");

  ModelBundle ck = load_bundle(cfg.checkpoint_dir + "/ckpt_000002.bin");
  CHECK(ck.params.size() == model.param_count());
  CHECK(ck.meta.at("epoch").get<int>() == 2);
  ModelBundle best = load_bundle(cfg.checkpoint_dir + "/best.bin");
  CHECK(best.meta.at("epoch").get<int>() == res.best_epoch);
  CHECK(best.config.problem == "darcy-continuous");

  std::filesystem::remove_all(cfg.checkpoint_dir);
  std::remove(cfg.loss_csv.c_str());

  SUBCASE("mismatched datasets are rejected") {
    Dataset other = tiny_data("darcy-piecewise", 2, 7, 1);
    Vector p = p0;
    CHECK_THROWS_AS(train_model(model, p, other, cfg), ConfigError);
    Dataset coarse = tiny_data("darcy-continuous", 2, 9, 1);
    CHECK_THROWS_AS(train_model(model, p, coarse, cfg), ConfigError);
    Vector wrong = Vector::Zero(3);
    CHECK_THROWS_AS(train_model(model, wrong, data, cfg), ShapeError);
  }
}

TEST_CASE("divergent runs abort and restore the best parameters") {
  IgnoModel model(tiny_model("darcy-continuous"));
  Dataset data = tiny_data("darcy-continuous", 6, 7, 11);

  TrainConfig cfg = quick_config();
  cfg.epochs = 30;
  cfg.lr = 1000.0;
  cfg.divergence_factor = 2.0;
  cfg.checkpoint_dir = "/tmp/igno_trainer_blowup";
  std::filesystem::remove_all(cfg.checkpoint_dir);

  Rng rng = make_rng(1, 2);
  Vector p;
  model.init(p, rng);
  TrainResult res = train_model(model, p, data, cfg);
  CHECK(res.diverged);
  CHECK(res.epochs_run < 30);

  ModelBundle best = load_bundle(cfg.checkpoint_dir + "/best.bin");
  CHECK((p.array() == best.params.array()).all());
  std::filesystem::remove_all(cfg.checkpoint_dir);
}

TEST_CASE("operator training pairs samples with boundary patterns") {
  IgnoModel model(tiny_model("eit"));
  Dataset data = tiny_data("eit", 2, 8, 3);

  TrainConfig cfg = quick_config();
  cfg.epochs = 2;
  cfg.batch = 3;  // 2 samples x 3 patterns = 6 items per epoch
  Rng rng = make_rng(4, 2);
  Vector p0;
  model.init(p0, rng);

  Vector p1 = p0;
  TrainResult res = train_model(model, p1, data, cfg);
  CHECK(res.epochs_run == 2);
  CHECK(std::isfinite(res.last.total));
  CHECK(res.last.bd == 0.0);

  Vector p2 = p0;
  train_model(model, p2, data, cfg);
  CHECK((p1.array() == p2.array()).all());
}

TEST_CASE("phase targets binarize for the sigmoid decoder") {
  ModelConfig mc = tiny_model("darcy-piecewise");
  IgnoModel model(mc);
  REQUIRE(model.config().coef_out == Act::sigmoid);
  Dataset data = tiny_data("darcy-piecewise", 4, 7, 2);

  TrainConfig cfg = quick_config();
  cfg.epochs = 1;
  Rng rng = make_rng(9, 2);
  Vector p;
  model.init(p, rng);
  TrainResult res = train_model(model, p, data, cfg);
  CHECK(std::isfinite(res.last.rec));
  // Binary cross entropy on fresh sigmoid outputs sits near ln 2.
  CHECK(res.last.rec < 5.0);
}

TEST_CASE("latent extraction matches direct encoding") {
  IgnoModel model(tiny_model("darcy-continuous"));
  Dataset data = tiny_data("darcy-continuous", 6, 7, 11);
  Rng rng = make_rng(1, 2);
  Vector p;
  model.init(p, rng);

  Matrix latents = extract_latents(model, p, data);
  REQUIRE(latents.rows() == 6);
  REQUIRE(latents.cols() == 4);
  CHECK(latents.cwiseAbs().maxCoeff() <= 1.0);

  Matrix grids(49, 6);
  for (int i = 0; i < 6; ++i) grids.col(i) = data.coeffs[i].values;
  Matrix direct = model.encode(p, grids).transpose();
  CHECK((latents.array() == direct.array()).all());

  Dataset coarse = tiny_data("darcy-continuous", 2, 9, 1);
  CHECK_THROWS_AS(extract_latents(model, p, coarse), ConfigError);
}
