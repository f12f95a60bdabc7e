#pragma once

#include <memory>
#include <string>
#include <vector>

#include "igno/encoder.hpp"
#include "igno/multionet.hpp"
#include "igno/physics.hpp"
#include "igno/store.hpp"

namespace igno {

struct LossWeights {
  double pde = 0.25;
  double bd = 0.5;
  double rec = 2.0;
};

// Everything needed to rebuild a model: problem identity, encoder and
// decoder shapes, input normalization, loss weights and the PDE source.
struct ModelConfig {
  std::string problem;  // darcy-continuous | darcy-piecewise | eit
  int grid = 29;
  int latent = 64;
  std::vector<int> conv_channels;
  std::vector<int> enc_hidden;
  InputTransform enc_tf;
  int sol_depth = 6, sol_width = 100;
  int coef_depth = 6, coef_width = 100;
  Act sol_act = Act::tanh_sin;
  Act coef_trunk_act = Act::tanh_sin;
  Act coef_branch_act = Act::tanh_sin;
  Act coef_out = Act::identity;
  // Physical coefficient behind a probabilistic phase decoder: the residual
  // sees phase_lo + (phase_hi - phase_lo) * probability.
  double phase_lo = 5.0, phase_hi = 10.0;
  int patterns = 0;  // one-hot boundary codes appended to the solution branch
  double f_const = 10.0;
  LossWeights weights;

  static ModelConfig for_problem(const std::string& name);
  void validate() const;
  Json to_json() const;
  static ModelConfig from_json(const Json& j);
};

// The generative operator pair: one coefficient encoder and two MultiONet
// decoders sharing a latent code. Parameters live in one flat vector with
// layout [encoder | solution decoder | coefficient decoder].
class IgnoModel {
 public:
  explicit IgnoModel(ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }
  const CoeffEncoder& encoder() const { return *enc_; }
  const MultiOnet& sol_decoder() const { return *sol_; }
  const MultiOnet& coef_decoder() const { return *coef_; }
  int param_count() const { return count_; }
  // Reconstruction targets are evaluated on the encoder grid nodes.
  const Matrix& rec_points() const { return rec_points_; }

  Eigen::Ref<const Vector> enc_params(const Vector& p) const;
  Eigen::Ref<const Vector> sol_params(const Vector& p) const;
  Eigen::Ref<const Vector> coef_params(const Vector& p) const;

  void init(Vector& params, Rng& rng) const;

  struct BatchLoss {
    double total = 0, pde = 0, bd = 0, rec = 0;
  };

  // Physics-informed loss over one batch. grids: grid^2 x B coefficient
  // columns; pattern: boundary index per item (1-based, empty unless the
  // model uses patterns); rec_target: B x grid^2 decoder targets; ps: the
  // particle set shared by the batch. Accumulates into grad when nonempty.
  BatchLoss batch_loss(const Vector& params, const Matrix& grids,
                       const std::vector<int>& pattern, const Matrix& rec_target,
                       const TestParticleSet& ps, Eigen::Ref<Vector> grad) const;

  // Latent codes for raw coefficient grids.
  Matrix encode(const Vector& params, const Matrix& grids) const;

  // Reconstructed coefficient values at points (codes: latent x B rows out).
  Matrix coefficient_values(const Vector& params, const Matrix& codes,
                            const Matrix& points) const;

  // Mollified solution jets at points; pattern must match codes columns when
  // the model uses boundary drives, otherwise pass {}.
  Channels solution_jets(const Vector& params, const Matrix& codes,
                         const std::vector<int>& pattern, const Matrix& points,
                         int order) const;

 private:
  ModelConfig cfg_;
  std::unique_ptr<CoeffEncoder> enc_;
  std::unique_ptr<MultiOnet> sol_, coef_;
  Matrix rec_points_;
  int count_ = 0, sol_offset_ = 0, coef_offset_ = 0;
};

// Uniform grid nodes on [0,1]^2 as 2 x (side^2) points, row-major, y slow;
// matches the flattening of coefficient grids.
Matrix grid_points(int side);

struct ModelBundle {
  ModelConfig config;
  Vector params;
  Json meta;
};

void save_bundle(const ModelBundle& bundle, const std::string& path);
ModelBundle load_bundle(const std::string& path);

}  // namespace igno
