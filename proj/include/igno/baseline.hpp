#pragma once

#include <memory>
#include <string>

#include "igno/dataset.hpp"
#include "igno/multionet.hpp"
#include "igno/trainer.hpp"

namespace igno {

// Reference method for the solution-based problems: a pair of operator
// decoders conditioned directly on the sensor readings, trained with a
// strong-form composite loss. No encoder, no latent space, no mollifier;
// boundary conditions enter as a penalty and recovery is a single forward
// pass. Operator-based (current) measurements are out of scope for it.
struct PidionsConfig {
  std::string problem;  // darcy-continuous | darcy-piecewise
  int sensors = 100;    // branch input width, one reading per probe
  int grid = 29;        // prediction resolution
  int sol_depth = 6, sol_width = 100;
  int coef_depth = 6, coef_width = 100;
  Act sol_act = Act::tanh_sin;
  Act coef_trunk_act = Act::tanh_sin;
  Act coef_branch_act = Act::tanh_sin;
  double lambda_physics = 1.0, lambda_data = 2.0;
  double f_const = 10.0;
  int colloc_interior = 400;  // residual points, resampled per batch
  int colloc_boundary = 100;  // boundary-penalty points, resampled per batch
  // Piecewise recovery: raw predictions split at the threshold into the two
  // phase values.
  double threshold = 7.5;
  double phase_lo = 5.0, phase_hi = 10.0;

  static PidionsConfig for_problem(const std::string& name, int sensors);
  bool piecewise() const { return problem == "darcy-piecewise"; }
  void validate() const;
  Json to_json() const;
  static PidionsConfig from_json(const Json& j);
};

class PidionsModel {
 public:
  explicit PidionsModel(PidionsConfig cfg);

  const PidionsConfig& config() const { return cfg_; }
  const MultiOnet& sol_decoder() const { return *sol_; }
  const MultiOnet& coef_decoder() const { return *coef_; }
  int param_count() const { return count_; }

  Eigen::Ref<const Vector> sol_params(const Vector& p) const;
  Eigen::Ref<const Vector> coef_params(const Vector& p) const;

  void init(Vector& params, Rng& rng) const;

  struct BatchLoss {
    double total = 0, pde = 0, bd = 0, data = 0;
  };

  // Composite loss over one batch of measurement rows (B x m). interior sets
  // the strong-form residual points (2 x P), boundary the penalty points
  // (2 x Pb), sensor_pts the probe positions (2 x m) the data term is
  // evaluated at. Accumulates into grad when nonempty.
  BatchLoss batch_loss(const Vector& params, const Matrix& meas,
                       const Matrix& interior, const Matrix& boundary,
                       const Matrix& sensor_pts, Eigen::Ref<Vector> grad) const;

  // Raw decoder outputs at points, one row per measurement row.
  Matrix coefficient_values(const Vector& params, const Matrix& meas,
                            const Matrix& points) const;
  Matrix solution_values(const Vector& params, const Matrix& meas,
                         const Matrix& points) const;

 private:
  PidionsConfig cfg_;
  std::unique_ptr<MultiOnet> sol_, coef_;
  int count_ = 0, coef_offset_ = 0;
};

struct PidionsBundle {
  PidionsConfig config;
  Vector params;
  SensorLayout sensors;  // probe layout the branch was trained on
  Json meta;
};

void save_pidions(const PidionsBundle& bundle, const std::string& path);
PidionsBundle load_pidions(const std::string& path);

// Supervised training from oracle sensor readings; shares the optimizer,
// schedule and divergence handling with the operator trainer.
PidionsBundle pidions_train(const Dataset& data, const PidionsConfig& cfg,
                            const TrainConfig& tc, TrainResult* result = nullptr);

struct PidionsPrediction {
  GridField coefficient;  // piecewise: thresholded into the two phases
  GridField solution;
};

// One forward pass per field; no optimization state. side 0 decodes on the
// training grid.
PidionsPrediction pidions_predict(const PidionsBundle& bundle,
                                  const Vector& measurement, int side = 0);

}  // namespace igno
