#include "igno/trainer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>

#include "igno/error.hpp"

namespace igno {

Adam::Adam(Eigen::Index n, double beta1, double beta2, double eps)
    : m_(Vector::Zero(n)), v_(Vector::Zero(n)), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(Vector& params, const Vector& grad, double lr) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw ShapeError("Adam::step: size mismatch");
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  params.array() -=
      lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("TrainConfig: epochs must be positive");
  if (batch < 1) throw ConfigError("TrainConfig: batch must be positive");
  if (lr <= 0 || lr_factor <= 0) throw ConfigError("TrainConfig: bad learning rate");
  if (lr_period < 1) throw ConfigError("TrainConfig: lr period must be positive");
  if (particles < 1) throw ConfigError("TrainConfig: need at least one particle");
  if (particle_radius <= 0 || 2 * particle_radius >= 1)
    throw ConfigError("TrainConfig: particle radius must fit the domain");
  if (clip && clip_norm <= 0) throw ConfigError("TrainConfig: bad clip norm");
  if (divergence_factor <= 1) throw ConfigError("TrainConfig: divergence factor <= 1");
}

Json TrainConfig::to_json() const {
  return Json{{"epochs", epochs},
              {"batch", batch},
              {"lr", lr},
              {"lr_factor", lr_factor},
              {"lr_period", lr_period},
              {"clip", clip},
              {"clip_norm", clip_norm},
              {"particles", particles},
              {"particle_radius", particle_radius},
              {"checkpoint_every", checkpoint_every},
              {"seed", seed},
              {"divergence_factor", divergence_factor}};
}

TrainConfig TrainConfig::from_json(const Json& j) {
  TrainConfig c;
  if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
  if (j.contains("batch")) c.batch = j.at("batch").get<int>();
  if (j.contains("lr")) c.lr = j.at("lr").get<double>();
  if (j.contains("lr_factor")) c.lr_factor = j.at("lr_factor").get<double>();
  if (j.contains("lr_period")) c.lr_period = j.at("lr_period").get<int>();
  if (j.contains("clip")) c.clip = j.at("clip").get<bool>();
  if (j.contains("clip_norm")) c.clip_norm = j.at("clip_norm").get<double>();
  if (j.contains("particles")) c.particles = j.at("particles").get<int>();
  if (j.contains("particle_radius"))
    c.particle_radius = j.at("particle_radius").get<double>();
  if (j.contains("checkpoint_every"))
    c.checkpoint_every = j.at("checkpoint_every").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("divergence_factor"))
    c.divergence_factor = j.at("divergence_factor").get<double>();
  c.validate();
  return c;
}

double lr_at(const TrainConfig& cfg, int epoch) {
  return cfg.lr * std::pow(cfg.lr_factor, epoch / cfg.lr_period);
}

void shuffle_indices(std::vector<int>& idx, Rng& rng) {
  for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i)
    std::swap(idx[i], idx[uniform_int(rng, 0, i)]);
}

namespace {

constexpr std::uint64_t kStreamShuffle = 0x5a11f;
constexpr std::uint64_t kStreamParticles = 0x9a47;

// Flattened coefficient grids (grid^2 x N) plus decoder targets (N x grid^2):
// raw values for regression decoders, phase indicators for the sigmoid one.
struct TrainTensors {
  Matrix grids;
  Matrix targets;
};

TrainTensors gather_tensors(const IgnoModel& model, const Dataset& data) {
  const ModelConfig& mc = model.config();
  const int side = mc.grid;
  const auto n = static_cast<Eigen::Index>(data.size());
  if (data.size() == 0) throw ConfigError("train_model: empty dataset");
  if (data.coeffs[0].nx != side || data.coeffs[0].ny != side)
    throw ConfigError("train_model: dataset grid does not match the model");

  TrainTensors t;
  t.grids.resize(static_cast<Eigen::Index>(side) * side, n);
  for (Eigen::Index i = 0; i < n; ++i) t.grids.col(i) = data.coeffs[i].values;
  if (mc.coef_out == Act::sigmoid)
    t.targets = (t.grids.array() > 7.5).cast<double>().matrix().transpose();
  else
    t.targets = t.grids.transpose();
  return t;
}

}  // namespace

TrainResult train_model(const IgnoModel& model, Vector& params, const Dataset& data,
                        const TrainConfig& cfg) {
  cfg.validate();
  if (params.size() != model.param_count())
    throw ShapeError("train_model: parameter size mismatch");
  if (data.problem != model.config().problem)
    throw ConfigError("train_model: dataset problem " + data.problem +
                      " does not match the model");
  const auto t0 = std::chrono::steady_clock::now();

  TrainTensors tensors = gather_tensors(model, data);
  const int patterns = model.config().patterns;
  const int n_items = static_cast<int>(data.size()) * std::max(patterns, 1);

  Rng shuffle_rng = make_rng(cfg.seed, kStreamShuffle);
  Rng particle_rng = make_rng(cfg.seed, kStreamParticles);
  std::vector<int> order(n_items);
  for (int i = 0; i < n_items; ++i) order[i] = i;

  Adam opt(params.size());
  Vector grad(params.size());
  Vector best_params = params;
  TrainResult res;
  res.best_loss = std::numeric_limits<double>::infinity();

  std::vector<std::vector<std::string>> csv_rows;
  const bool log_csv = !cfg.loss_csv.empty();
  if (!cfg.checkpoint_dir.empty())
    std::filesystem::create_directories(cfg.checkpoint_dir);

  auto checkpoint = [&](const std::string& name, const Vector& state, int epoch,
                        double loss) {
    if (cfg.checkpoint_dir.empty()) return;
    ModelBundle b;
    b.config = model.config();
    b.params = state;
    b.meta = {{"epoch", epoch}, {"loss", loss}, {"train_config", cfg.to_json()}};
    save_bundle(b, cfg.checkpoint_dir + "/" + name);
  };

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle_indices(order, shuffle_rng);
    const double lr = lr_at(cfg, epoch);
    IgnoModel::BatchLoss mean;

    for (int start = 0; start < n_items; start += cfg.batch) {
      const int bs = std::min(cfg.batch, n_items - start);
      Matrix grids(tensors.grids.rows(), bs);
      Matrix targets(bs, tensors.targets.cols());
      std::vector<int> pattern;
      if (patterns > 0) pattern.resize(bs);
      for (int b = 0; b < bs; ++b) {
        const int item = order[start + b];
        const int sample = patterns > 0 ? item / patterns : item;
        grids.col(b) = tensors.grids.col(sample);
        targets.row(b) = tensors.targets.row(sample);
        if (patterns > 0) pattern[b] = item % patterns + 1;
      }

      TestParticleSet ps =
          sample_particles(cfg.particles, cfg.particle_radius, particle_rng);
      grad.setZero();
      IgnoModel::BatchLoss parts =
          model.batch_loss(params, grids, pattern, targets, ps, grad);
      if (cfg.clip) {
        const double norm = grad.norm();
        if (norm > cfg.clip_norm) grad *= cfg.clip_norm / norm;
      }
      opt.step(params, grad, lr);

      const double w = static_cast<double>(bs) / n_items;
      mean.total += w * parts.total;
      mean.pde += w * parts.pde;
      mean.bd += w * parts.bd;
      mean.rec += w * parts.rec;
    }

    res.epochs_run = epoch;
    res.last = mean;
    if (log_csv)
      csv_rows.push_back({std::to_string(epoch), csv_number(lr), csv_number(mean.total),
                          csv_number(mean.pde), csv_number(mean.bd),
                          csv_number(mean.rec)});

    const bool bad = !std::isfinite(mean.total) ||
                     (std::isfinite(res.best_loss) &&
                      mean.total > cfg.divergence_factor * res.best_loss);
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
    if (cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) {
      char name[32];
      std::snprintf(name, sizeof(name), "ckpt_%06d.bin", epoch);
      checkpoint(name, params, epoch, mean.total);
    }
  }

  checkpoint("best.bin", best_params, res.best_epoch, res.best_loss);
  if (log_csv)
    write_csv(cfg.loss_csv, {"epoch", "lr", "total", "pde", "bd", "rec"}, csv_rows);
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

Matrix extract_latents(const IgnoModel& model, const Vector& params,
                       const Dataset& data) {
  const int side = model.config().grid;
  if (data.size() == 0) throw ConfigError("extract_latents: empty dataset");
  if (data.coeffs[0].nx != side || data.coeffs[0].ny != side)
    throw ConfigError("extract_latents: dataset grid does not match the model");
  const auto n = static_cast<Eigen::Index>(data.size());
  Matrix latents(n, model.config().latent);
  const Eigen::Index chunk = 256;
  for (Eigen::Index start = 0; start < n; start += chunk) {
    const Eigen::Index bs = std::min(chunk, n - start);
    Matrix grids(static_cast<Eigen::Index>(side) * side, bs);
    for (Eigen::Index i = 0; i < bs; ++i)
      grids.col(i) = data.coeffs[start + i].values;
    latents.middleRows(start, bs) = model.encode(params, grids).transpose();
  }
  return latents;
}

}  // namespace igno
