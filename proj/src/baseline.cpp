#include "igno/baseline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <utility>

#include "igno/error.hpp"
#include "igno/model.hpp"
#include "igno/physics.hpp"

namespace igno {

namespace {

constexpr std::uint64_t kStreamShuffle = 0x5a11f;  // same role as the trainer's
constexpr std::uint64_t kStreamColloc = 0xc0110c;

// Uniform interior draws plus perimeter draws for the boundary penalty.
Matrix draw_interior(int n, Rng& rng) {
  Matrix pts(2, n);
  for (int i = 0; i < n; ++i) {
    pts(0, i) = uniform_real(rng, 0.0, 1.0);
    pts(1, i) = uniform_real(rng, 0.0, 1.0);
  }
  return pts;
}

Matrix draw_boundary(int n, Rng& rng) {
  Matrix pts(2, n);
  for (int i = 0; i < n; ++i) {
    const int side = uniform_int(rng, 0, 3);
    const double t = uniform_real(rng, 0.0, 1.0);
    switch (side) {
      case 0: pts(0, i) = t; pts(1, i) = 0.0; break;
      case 1: pts(0, i) = 1.0; pts(1, i) = t; break;
      case 2: pts(0, i) = t; pts(1, i) = 1.0; break;
      default: pts(0, i) = 0.0; pts(1, i) = t; break;
    }
  }
  return pts;
}

}  // namespace

PidionsConfig PidionsConfig::for_problem(const std::string& name, int sensors) {
  PidionsConfig c;
  c.problem = name;
  c.sensors = sensors;
  if (name == "darcy-continuous") {
    c.sol_depth = 6;
    c.coef_depth = 6;
  } else if (name == "darcy-piecewise") {
    c.sol_depth = 5;
    c.coef_depth = 5;
    c.coef_width = 256;
    c.coef_trunk_act = Act::silu_sin;
    c.coef_branch_act = Act::silu_id;
  } else if (name == "eit") {
    throw ConfigError(
        "PidionsConfig: measurement-conditioned decoders need pointwise "
        "solution data, not boundary currents");
  } else {
    throw ConfigError("PidionsConfig: unknown problem " + name);
  }
  c.validate();
  return c;
}

void PidionsConfig::validate() const {
  if (problem != "darcy-continuous" && problem != "darcy-piecewise")
    throw ConfigError("PidionsConfig: unsupported problem " + problem);
  if (sensors < 1) throw ConfigError("PidionsConfig: need at least one sensor");
  if (grid < 2) throw ConfigError("PidionsConfig: grid too small");
  if (sol_depth < 1 || coef_depth < 1 || sol_width < 1 || coef_width < 1)
    throw ConfigError("PidionsConfig: decoder shape must be positive");
  if (lambda_physics < 0 || lambda_data < 0)
    throw ConfigError("PidionsConfig: loss weights must be nonnegative");
  if (colloc_interior < 1 || colloc_boundary < 1)
    throw ConfigError("PidionsConfig: need collocation points");
  if (phase_hi <= phase_lo)
    throw ConfigError("PidionsConfig: phase values must be ordered");
}

Json PidionsConfig::to_json() const {
  Json j;
  j["problem"] = problem;
  j["sensors"] = sensors;
  j["grid"] = grid;
  j["sol"] = {{"depth", sol_depth}, {"width", sol_width}, {"act", act_name(sol_act)}};
  j["coef"] = {{"depth", coef_depth},
               {"width", coef_width},
               {"trunk_act", act_name(coef_trunk_act)},
               {"branch_act", act_name(coef_branch_act)}};
  j["lambda"] = {{"physics", lambda_physics}, {"data", lambda_data}};
  j["f_const"] = f_const;
  j["colloc"] = {{"interior", colloc_interior}, {"boundary", colloc_boundary}};
  j["phase"] = {{"threshold", threshold}, {"lo", phase_lo}, {"hi", phase_hi}};
  return j;
}

PidionsConfig PidionsConfig::from_json(const Json& j) {
  PidionsConfig c;
  c.problem = j.at("problem").get<std::string>();
  c.sensors = j.at("sensors").get<int>();
  c.grid = j.at("grid").get<int>();
  const Json& s = j.at("sol");
  c.sol_depth = s.at("depth").get<int>();
  c.sol_width = s.at("width").get<int>();
  c.sol_act = act_from_name(s.at("act").get<std::string>());
  const Json& a = j.at("coef");
  c.coef_depth = a.at("depth").get<int>();
  c.coef_width = a.at("width").get<int>();
  c.coef_trunk_act = act_from_name(a.at("trunk_act").get<std::string>());
  c.coef_branch_act = act_from_name(a.at("branch_act").get<std::string>());
  const Json& l = j.at("lambda");
  c.lambda_physics = l.at("physics").get<double>();
  c.lambda_data = l.at("data").get<double>();
  c.f_const = j.at("f_const").get<double>();
  const Json& p = j.at("colloc");
  c.colloc_interior = p.at("interior").get<int>();
  c.colloc_boundary = p.at("boundary").get<int>();
  const Json& ph = j.at("phase");
  c.threshold = ph.at("threshold").get<double>();
  c.phase_lo = ph.at("lo").get<double>();
  c.phase_hi = ph.at("hi").get<double>();
  c.validate();
  return c;
}

PidionsModel::PidionsModel(PidionsConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  sol_ = std::make_unique<MultiOnet>(cfg_.sensors, 2, cfg_.sol_depth, cfg_.sol_width,
                                     cfg_.sol_act, cfg_.sol_act);
  coef_ = std::make_unique<MultiOnet>(cfg_.sensors, 2, cfg_.coef_depth, cfg_.coef_width,
                                      cfg_.coef_branch_act, cfg_.coef_trunk_act);
  coef_offset_ = sol_->param_count();
  count_ = coef_offset_ + coef_->param_count();
}

Eigen::Ref<const Vector> PidionsModel::sol_params(const Vector& p) const {
  return p.segment(0, sol_->param_count());
}

Eigen::Ref<const Vector> PidionsModel::coef_params(const Vector& p) const {
  return p.segment(coef_offset_, coef_->param_count());
}

void PidionsModel::init(Vector& params, Rng& rng) const {
  params.resize(count_);
  sol_->init(params.segment(0, sol_->param_count()), rng);
  coef_->init(params.segment(coef_offset_, coef_->param_count()), rng);
}

PidionsModel::BatchLoss PidionsModel::batch_loss(const Vector& params,
                                                 const Matrix& meas,
                                                 const Matrix& interior,
                                                 const Matrix& boundary,
                                                 const Matrix& sensor_pts,
                                                 Eigen::Ref<Vector> grad) const {
  if (params.size() != count_)
    throw ShapeError("PidionsModel::batch_loss: parameter size mismatch");
  if (meas.cols() != cfg_.sensors)
    throw ShapeError("PidionsModel::batch_loss: one reading per sensor required");
  if (sensor_pts.cols() != cfg_.sensors)
    throw ShapeError("PidionsModel::batch_loss: sensor point count mismatch");
  const bool with_grad = grad.size() > 0;
  if (with_grad && grad.size() != count_)
    throw ShapeError("PidionsModel::batch_loss: gradient size mismatch");

  const Matrix codes = meas.transpose();  // branch input: readings per column
  const auto sol_p = sol_params(params);
  const auto coef_p = coef_params(params);

  FfcnTrace sol_in_tt, sol_bd_tt, sol_sens_tt, coef_in_tt;
  sol_->trunk_forward(sol_p, interior, 2, sol_in_tt, with_grad);
  sol_->trunk_forward(sol_p, boundary, 0, sol_bd_tt, with_grad);
  sol_->trunk_forward(sol_p, sensor_pts, 0, sol_sens_tt, with_grad);
  coef_->trunk_forward(coef_p, interior, 1, coef_in_tt, with_grad);

  MultiOnet::Trace sol_in_tr, sol_bd_tr, sol_sens_tr, coef_in_tr;
  sol_->forward(sol_p, codes, sol_in_tt, sol_in_tr, with_grad);
  sol_->forward(sol_p, codes, sol_bd_tt, sol_bd_tr, with_grad);
  sol_->forward(sol_p, codes, sol_sens_tt, sol_sens_tr, with_grad);
  coef_->forward(coef_p, codes, coef_in_tt, coef_in_tr, with_grad);

  BatchLoss out;
  Matrix r = strong_residuals(coef_in_tr.out, sol_in_tr.out, cfg_.f_const);
  const Matrix zero_r = Matrix::Zero(r.rows(), r.cols());
  Matrix rbar;
  out.pde = mse_loss(r, zero_r, with_grad ? &rbar : nullptr);

  const Matrix zero_bd = Matrix::Zero(sol_bd_tr.out.v.rows(), sol_bd_tr.out.v.cols());
  Matrix bdbar;
  out.bd = mse_loss(sol_bd_tr.out.v, zero_bd, with_grad ? &bdbar : nullptr);

  Matrix databar;
  out.data = mse_loss(sol_sens_tr.out.v, meas, with_grad ? &databar : nullptr);

  out.total = cfg_.lambda_physics * (out.pde + out.bd) + cfg_.lambda_data * out.data;
  if (!with_grad) return out;

  rbar *= cfg_.lambda_physics;
  Channels a_adj, u_adj;
  strong_residual_adjoint(coef_in_tr.out, sol_in_tr.out, rbar, a_adj, u_adj);

  auto sol_grad = grad.segment(0, sol_->param_count());
  auto coef_grad = grad.segment(coef_offset_, coef_->param_count());
  sol_->backward(sol_p, sol_in_tr, sol_in_tt, u_adj, sol_grad);
  coef_->backward(coef_p, coef_in_tr, coef_in_tt, a_adj, coef_grad);

  bdbar *= cfg_.lambda_physics;
  sol_->backward(sol_p, sol_bd_tr, sol_bd_tt, value_input(std::move(bdbar)), sol_grad);
  databar *= cfg_.lambda_data;
  sol_->backward(sol_p, sol_sens_tr, sol_sens_tt, value_input(std::move(databar)),
                 sol_grad);
  return out;
}

Matrix PidionsModel::coefficient_values(const Vector& params, const Matrix& meas,
                                        const Matrix& points) const {
  if (meas.cols() != cfg_.sensors)
    throw ShapeError("PidionsModel: one reading per sensor required");
  FfcnTrace tt;
  coef_->trunk_forward(coef_params(params), points, 0, tt, false);
  MultiOnet::Trace tr;
  coef_->forward(coef_params(params), meas.transpose(), tt, tr, false);
  return tr.out.v;
}

Matrix PidionsModel::solution_values(const Vector& params, const Matrix& meas,
                                     const Matrix& points) const {
  if (meas.cols() != cfg_.sensors)
    throw ShapeError("PidionsModel: one reading per sensor required");
  FfcnTrace tt;
  sol_->trunk_forward(sol_params(params), points, 0, tt, false);
  MultiOnet::Trace tr;
  sol_->forward(sol_params(params), meas.transpose(), tt, tr, false);
  return tr.out.v;
}

void save_pidions(const PidionsBundle& bundle, const std::string& path) {
  ContainerWriter out;
  Json meta;
  meta["format"] = "igno-pidions";
  meta["config"] = bundle.config.to_json();
  meta["sides"] = bundle.sensors.side;
  meta["info"] = bundle.meta.is_null() ? Json::object() : bundle.meta;
  out.set_meta(meta);
  out.add("params", "params",
          DenseArray({static_cast<std::size_t>(bundle.params.size())}, bundle.params),
          "trained");
  const Eigen::Index m = bundle.sensors.xy.rows();
  Vector xy(bundle.sensors.xy.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    xy[2 * i] = bundle.sensors.xy(i, 0);
    xy[2 * i + 1] = bundle.sensors.xy(i, 1);
  }
  out.add("sensors", "sensors", DenseArray({static_cast<std::size_t>(m), 2}, xy),
          "layout");
  out.write(path);
}

PidionsBundle load_pidions(const std::string& path) {
  ContainerReader in(path);
  const Json& meta = in.meta();
  if (!meta.contains("format") || meta.at("format") != "igno-pidions")
    throw IoError("load_pidions: " + path + " is not a baseline container");
  PidionsBundle b;
  b.config = PidionsConfig::from_json(meta.at("config"));
  b.meta = meta.contains("info") ? meta.at("info") : Json::object();
  DenseArray params = in.read("params");
  b.params = params.data;
  PidionsModel check(b.config);
  if (b.params.size() != check.param_count())
    throw IoError("load_pidions: parameter block does not match the config");
  DenseArray xy = in.read("sensors");
  if (xy.shape.size() != 2 || xy.shape[1] != 2)
    throw IoError("load_pidions: malformed sensor table");
  const auto m = static_cast<Eigen::Index>(xy.shape[0]);
  b.sensors.xy.resize(m, 2);
  for (Eigen::Index i = 0; i < m; ++i) {
    b.sensors.xy(i, 0) = xy.data[2 * i];
    b.sensors.xy(i, 1) = xy.data[2 * i + 1];
  }
  b.sensors.side = meta.at("sides").get<std::vector<int>>();
  if (static_cast<Eigen::Index>(b.sensors.side.size()) != m)
    throw IoError("load_pidions: sensor side list does not match the table");
  return b;
}

PidionsBundle pidions_train(const Dataset& data, const PidionsConfig& cfg,
                            const TrainConfig& tc, TrainResult* result) {
  cfg.validate();
  tc.validate();
  if (data.problem != cfg.problem)
    throw ConfigError("pidions_train: dataset problem " + data.problem +
                      " does not match the config");
  if (data.size() == 0) throw ConfigError("pidions_train: empty dataset");
  if (!data.has_measurements())
    throw ConfigError("pidions_train: dataset carries no sensor readings");
  if (data.sensors.count() != cfg.sensors)
    throw ConfigError("pidions_train: sensor count does not match the config");
  const auto t0 = std::chrono::steady_clock::now();

  const Matrix& meas_all = data.measurements();  // N x m, noise free
  const Matrix sensor_pts = data.sensors.xy.transpose();
  const int n_items = data.size();

  PidionsModel model(cfg);
  Vector params;
  Rng init_rng = make_rng(tc.seed);
  model.init(params, init_rng);

  Rng shuffle_rng = make_rng(tc.seed, kStreamShuffle);
  Rng colloc_rng = make_rng(tc.seed, kStreamColloc);
  std::vector<int> order(n_items);
  for (int i = 0; i < n_items; ++i) order[i] = i;

  Adam opt(params.size());
  Vector grad(params.size());
  Vector best_params = params;
  TrainResult res;
  res.best_loss = std::numeric_limits<double>::infinity();

  std::vector<std::vector<std::string>> csv_rows;
  const bool log_csv = !tc.loss_csv.empty();
  if (!tc.checkpoint_dir.empty())
    std::filesystem::create_directories(tc.checkpoint_dir);

  auto checkpoint = [&](const std::string& name, const Vector& state, int epoch,
                        double loss) {
    if (tc.checkpoint_dir.empty()) return;
    PidionsBundle b;
    b.config = cfg;
    b.params = state;
    b.sensors = data.sensors;
    b.meta = {{"epoch", epoch}, {"loss", loss}, {"train_config", tc.to_json()}};
    save_pidions(b, tc.checkpoint_dir + "/" + name);
  };

  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    shuffle_indices(order, shuffle_rng);
    const double lr = lr_at(tc, epoch);
    PidionsModel::BatchLoss mean;

    for (int start = 0; start < n_items; start += tc.batch) {
      const int bs = std::min(tc.batch, n_items - start);
      Matrix meas(bs, meas_all.cols());
      for (int b = 0; b < bs; ++b) meas.row(b) = meas_all.row(order[start + b]);

      Matrix interior = draw_interior(cfg.colloc_interior, colloc_rng);
      Matrix boundary = draw_boundary(cfg.colloc_boundary, colloc_rng);
      grad.setZero();
      PidionsModel::BatchLoss parts =
          model.batch_loss(params, meas, interior, boundary, sensor_pts, grad);
      if (tc.clip) {
        const double norm = grad.norm();
        if (norm > tc.clip_norm) grad *= tc.clip_norm / norm;
      }
      opt.step(params, grad, lr);

      const double w = static_cast<double>(bs) / n_items;
      mean.total += w * parts.total;
      mean.pde += w * parts.pde;
      mean.bd += w * parts.bd;
      mean.data += w * parts.data;
    }

    res.epochs_run = epoch;
    res.last.total = mean.total;
    res.last.pde = mean.pde;
    res.last.bd = mean.bd;
    res.last.rec = mean.data;  // data misfit rides in the spare slot
    if (log_csv)
      csv_rows.push_back({std::to_string(epoch), csv_number(lr),
                          csv_number(mean.total), csv_number(mean.pde),
                          csv_number(mean.bd), csv_number(mean.data)});

    const bool bad = !std::isfinite(mean.total) ||
                     (std::isfinite(res.best_loss) &&
                      mean.total > tc.divergence_factor * res.best_loss);
    if (bad) {
      params = best_params;
      res.diverged = true;
      break;
    }
    if (mean.total < res.best_loss) {
      res.best_loss = mean.total;
      res.best_epoch = epoch;
      best_params = params;
    }
    if (tc.checkpoint_every > 0 && epoch % tc.checkpoint_every == 0) {
      char name[32];
      std::snprintf(name, sizeof(name), "ckpt_%06d.bin", epoch);
      checkpoint(name, params, epoch, mean.total);
    }
  }

  checkpoint("best.bin", best_params, res.best_epoch, res.best_loss);
  if (log_csv)
    write_csv(tc.loss_csv, {"epoch", "lr", "total", "pde", "bd", "data"}, csv_rows);
  res.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (result) *result = res;

  PidionsBundle bundle;
  bundle.config = cfg;
  bundle.params = std::move(params);
  bundle.sensors = data.sensors;
  bundle.meta = {{"epochs", res.epochs_run},
                 {"best_loss", res.best_loss},
                 {"best_epoch", res.best_epoch},
                 {"train_config", tc.to_json()}};
  return bundle;
}

PidionsPrediction pidions_predict(const PidionsBundle& bundle,
                                  const Vector& measurement, int side) {
  const PidionsConfig& cfg = bundle.config;
  if (measurement.size() != cfg.sensors)
    throw ShapeError("pidions_predict: reading count does not match the probes");
  if (side == 0) side = cfg.grid;
  PidionsModel model(cfg);
  if (bundle.params.size() != model.param_count())
    throw ShapeError("pidions_predict: parameter size mismatch");
  const Matrix pts = grid_points(side);
  const Matrix meas = measurement.transpose();

  PidionsPrediction out;
  Matrix a = model.coefficient_values(bundle.params, meas, pts);
  Matrix u = model.solution_values(bundle.params, meas, pts);
  out.coefficient = GridField(side, side);
  out.solution = GridField(side, side);
  if (cfg.piecewise()) {
    for (Eigen::Index i = 0; i < a.cols(); ++i)
      out.coefficient.values[i] = a(0, i) > cfg.threshold ? cfg.phase_hi : cfg.phase_lo;
  } else {
    out.coefficient.values = a.row(0).transpose();
  }
  out.solution.values = u.row(0).transpose();
  return out;
}

}  // namespace igno
