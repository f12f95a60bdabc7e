#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "igno/dataset.hpp"
#include "igno/model.hpp"

namespace igno {

// ADAM with bias correction; state persists across steps.
class Adam {
 public:
  explicit Adam(Eigen::Index n, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);
  void step(Vector& params, const Vector& grad, double lr);
  int steps() const { return t_; }

 private:
  Vector m_, v_;
  int t_ = 0;
  double beta1_, beta2_, eps_;
};

struct TrainConfig {
  int epochs = 2000;
  int batch = 50;
  double lr = 1e-3;
  double lr_factor = 0.5;
  int lr_period = 2500;
  bool clip = false;
  double clip_norm = 10.0;
  int particles = 100;
  double particle_radius = 0.05;
  int checkpoint_every = 500;
  std::string checkpoint_dir;  // empty disables checkpoint files
  std::string loss_csv;        // empty disables the loss log
  std::uint64_t seed = 0;
  double divergence_factor = 100.0;

  void validate() const;
  Json to_json() const;
  static TrainConfig from_json(const Json& j);
};

// Stepped learning rate, 1-based epochs: lr * factor^floor(epoch / period).
double lr_at(const TrainConfig& cfg, int epoch);

// In-place deterministic Fisher-Yates driven by the shared rng helpers.
void shuffle_indices(std::vector<int>& idx, Rng& rng);

struct TrainResult {
  int epochs_run = 0;
  bool diverged = false;
  double best_loss = 0.0;
  int best_epoch = 0;
  IgnoModel::BatchLoss last;  // mean parts of the final completed epoch
  double seconds = 0.0;
};

// Physics-informed training over the coefficient grids of a dataset. For
// operator-based models every (sample, pattern) pair is one item. On
// divergence the best parameters seen are restored.
TrainResult train_model(const IgnoModel& model, Vector& params, const Dataset& data,
                        const TrainConfig& cfg);

// Latent codes of every dataset sample, one row per sample.
Matrix extract_latents(const IgnoModel& model, const Vector& params,
                       const Dataset& data);

}  // namespace igno
