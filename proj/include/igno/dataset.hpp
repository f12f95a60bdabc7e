#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "igno/array.hpp"
#include "igno/oracle.hpp"
#include "igno/store.hpp"

namespace igno {

// Problem families share one dataset container. Generation is seeded and
// bit-reproducible; supervised channels (oracle solutions and measurements)
// are optional and guarded by an access flag so that operator training can
// be shown to never touch them.

enum class DatasetAccess { coefficients_only, supervised };

struct GenConfig {
  std::string problem;  // darcy-continuous | darcy-piecewise | eit
  int n_samples = 0;
  int grid = 0;  // coefficient image resolution; 0 = problem default
  std::uint64_t seed = 0;
  std::uint64_t sensor_seed = 1;  // shared across train/test splits
  bool out_of_dist = false;
  bool with_solutions = false;
  int oracle_n = 127;   // FD resolution for supervised channels
  int n_sensors = 0;    // 0 = problem default (100 interior / 128 boundary)
  double tau2 = 9.0;    // piecewise GP regularity
  double f_const = 10.0;
  bool keep_solution_grids = true;  // full u grids alongside measurements

  void validate() const;
  int resolved_grid() const;
  int resolved_sensors() const;
};

class Dataset {
 public:
  std::string problem;
  Json meta = Json::object();
  std::vector<GridField> coeffs;
  Matrix coeff_params;  // one row of generator parameters per sample
  SensorLayout sensors;

  int size() const { return static_cast<int>(coeffs.size()); }
  DatasetAccess access() const { return access_; }
  bool has_measurements() const { return measurements_.size() > 0; }
  bool has_solution_grids() const { return !solutions_.empty(); }

  // Supervised channels; any touch under coefficients_only access throws.
  // Darcy: one row of m sensor values per sample. EIT: row n*L + (l-1)
  // holds the currents for sample n under voltage pattern l.
  const Matrix& measurements() const;
  const std::vector<GridField>& solution_grids() const;

  // Pointwise coefficient evaluator for sample i, suitable for the oracle.
  ScalarFn coefficient_fn(int i) const;

  friend Dataset generate_dataset(const GenConfig& cfg);
  friend Dataset load_dataset(const std::string& path, DatasetAccess access);
  friend void save_dataset(const Dataset& ds, const std::string& path);

 private:
  DatasetAccess access_ = DatasetAccess::coefficients_only;
  Matrix measurements_;
  std::vector<GridField> solutions_;
};

Dataset generate_dataset(const GenConfig& cfg);
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path, DatasetAccess access);

}  // namespace igno
