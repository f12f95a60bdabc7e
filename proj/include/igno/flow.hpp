#pragma once

#include <string>

#include "igno/nn.hpp"
#include "igno/store.hpp"

namespace igno {

struct FlowConfig {
  int dim = 64;
  int steps = 3;
  int hidden = 64;  // width of the two hidden layers in each coupling net

  void validate() const;
  Json to_json() const;
  static FlowConfig from_json(const Json& j);
};

// Affine coupling flow between latent codes and a standard normal base.
// Each step conditions on one half of the coordinates and rescales and
// shifts the other half, alternating halves between steps. Scales pass
// through 2 tanh so a single step never stretches by more than e^2, and
// the last layer of every coupling net starts at zero, which makes the
// freshly initialized flow the identity map.
class CouplingFlow {
 public:
  explicit CouplingFlow(FlowConfig cfg);

  const FlowConfig& config() const { return cfg_; }
  int param_count() const { return count_; }
  const Ffcn& net() const { return s_net_; }

  void init(Vector& params, Rng& rng) const;

  // Codes to base variables, columns are samples. When log_det is given it
  // receives log|det dz/dx| per column.
  Matrix forward(Eigen::Ref<const Vector> p, const Matrix& x,
                 Vector* log_det = nullptr) const;
  Matrix inverse(Eigen::Ref<const Vector> p, const Matrix& z) const;

  // Log density of each column under the flow.
  Vector log_prob(Eigen::Ref<const Vector> p, const Matrix& x) const;

  // Mean negative log likelihood over the columns of x; parameter gradients
  // accumulate into grad unless it is empty.
  double nll(Eigen::Ref<const Vector> p, const Matrix& x,
             Eigen::Ref<Vector> grad) const;

 private:
  void split(const Matrix& v, int step, Matrix& a, Matrix& b) const;
  void merge(const Matrix& a, const Matrix& b, int step, Matrix& v) const;
  Eigen::Ref<const Vector> step_params(Eigen::Ref<const Vector> p, int step,
                                       bool scale_net) const;

  FlowConfig cfg_;
  Ffcn s_net_, t_net_;  // shared shape, per-step parameter segments
  int net_count_ = 0, count_ = 0;
};

struct FlowTrainConfig {
  int epochs = 2000;
  double lr = 1e-3;
  std::string loss_csv;  // empty disables the log

  void validate() const;
};

struct FlowTrainResult {
  int epochs_run = 0;
  double first_nll = 0.0;
  double final_nll = 0.0;
};

// Full-batch maximum likelihood with ADAM.
FlowTrainResult train_flow(const CouplingFlow& flow, Vector& params,
                           const Matrix& data, const FlowTrainConfig& cfg);

// Draw n base samples and push them through the inverse flow (dim x n).
Matrix sample_flow(const CouplingFlow& flow, const Vector& params, int n, Rng& rng);

struct FlowBundle {
  FlowConfig config;
  Vector params;
  Json meta;
};

void save_flow(const FlowBundle& bundle, const std::string& path);
FlowBundle load_flow(const std::string& path);

}  // namespace igno
