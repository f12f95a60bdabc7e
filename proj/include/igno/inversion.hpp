#pragma once

#include <memory>
#include <string>

#include "igno/flow.hpp"
#include "igno/model.hpp"
#include "igno/oracle.hpp"

namespace igno {

struct InversionConfig {
  int steps = 500;
  double lr = 0.01;
  double lr_factor = 2.0 / 3.0;
  int lr_period = 250;
  double rho_data = 1.0;
  double rho_pde = 50.0;
  int particles = 100;
  double particle_radius = 0.05;
  std::uint64_t seed = 0;
  std::string trajectory_csv;  // empty disables the per-step log

  // Tuned schedules per problem family; the EIT weights differ between
  // in-distribution and out-of-distribution targets.
  static InversionConfig for_problem(const std::string& problem,
                                     bool out_of_dist = false);
  void validate() const;
};

// Measurement misfit plus residual regularizer as a function of the latent
// code, over frozen decoder parameters. Trunk features, mollifier jets and
// the test particles are fixed at construction, so each evaluation only
// runs the branch networks.
//
// Solution-based models take interior sensors and one row of solution
// values; operator-based models take boundary sensors and one row of
// normal currents per voltage pattern.
class LatentObjective {
 public:
  LatentObjective(const IgnoModel& model, const Vector& params,
                  const SensorLayout& sensors, const Matrix& measurements,
                  const InversionConfig& cfg);
  ~LatentObjective();

  // Objective value; fills the code gradient and the unweighted parts when
  // requested.
  double eval(const Vector& code, Vector* grad, double* data_term = nullptr,
              double* pde_term = nullptr) const;

  const TestParticleSet& particles() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct InversionResult {
  Vector code;
  double objective = 0.0;
  double data_term = 0.0;
  double pde_term = 0.0;
  int steps_run = 0;
  double seconds = 0.0;
};

// ADAM descent on the latent code with a stepped learning rate. The code
// starts from one base draw pushed through the inverse flow; pass a null
// flow to start from zero.
InversionResult invert(const IgnoModel& model, const Vector& params,
                       const SensorLayout& sensors, const Matrix& measurements,
                       const CouplingFlow* flow, const Vector* flow_params,
                       const InversionConfig& cfg);

// Coefficient grid decoded from an optimized code. Phase decoders threshold
// the probability at 0.5 and map to {phase_lo, phase_hi}, ties to phase_lo.
GridField recovered_coefficient(const IgnoModel& model, const Vector& params,
                                const Vector& code, int side);

}  // namespace igno
