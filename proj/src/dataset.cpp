#include "igno/dataset.hpp"

#include <memory>

#include "igno/synth.hpp"

namespace igno {

namespace {

constexpr std::uint64_t kStreamCoeff = 0xc0effull;

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

DenseArray pack_matrix(const Matrix& m, std::vector<std::size_t> shape) {
  Vector flat(m.size());
  Eigen::Map<RowMajorMatrix>(flat.data(), m.rows(), m.cols()) = m;
  return DenseArray(std::move(shape), std::move(flat));
}

Matrix unpack_matrix(const DenseArray& a, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<Eigen::Index>(a.numel()) != rows * cols)
    throw ShapeError("dataset: block of " + std::to_string(a.numel()) +
                     " values does not fill " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  return Eigen::Map<const RowMajorMatrix>(a.data.data(), rows, cols);
}

DenseArray pack_fields(const std::vector<GridField>& fields) {
  const auto n = fields.size();
  const int ny = fields.front().ny, nx = fields.front().nx;
  Vector flat(static_cast<Eigen::Index>(n) * ny * nx);
  Eigen::Index at = 0;
  for (const auto& f : fields) {
    flat.segment(at, f.values.size()) = f.values;
    at += f.values.size();
  }
  return DenseArray({n, static_cast<std::size_t>(ny), static_cast<std::size_t>(nx)},
                    std::move(flat));
}

std::vector<GridField> unpack_fields(const DenseArray& a) {
  if (a.shape.size() != 3)
    throw ShapeError("dataset: field block must be rank 3, got " + a.shape_string());
  const auto n = a.shape[0];
  const int ny = static_cast<int>(a.shape[1]), nx = static_cast<int>(a.shape[2]);
  std::vector<GridField> fields;
  fields.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    GridField f(nx, ny);
    f.values = a.data.segment(static_cast<Eigen::Index>(i) * ny * nx,
                              static_cast<Eigen::Index>(ny) * nx);
    fields.push_back(std::move(f));
  }
  return fields;
}

bool is_darcy(const std::string& problem) {
  return problem == "darcy-continuous" || problem == "darcy-piecewise";
}

}  // namespace

void GenConfig::validate() const {
  if (!is_darcy(problem) && problem != "eit")
    throw ConfigError("unknown problem '" + problem +
                      "' (expected darcy-continuous, darcy-piecewise or eit)");
  if (n_samples < 1) throw ConfigError("n_samples must be positive");
  if (grid < 0 || (grid > 0 && grid < 2)) throw ConfigError("grid must be >= 2");
  if (oracle_n < 8) throw ConfigError("oracle_n must be >= 8");
  if (tau2 <= 0) throw ConfigError("tau2 must be positive");
  if (n_sensors < 0) throw ConfigError("n_sensors must be positive");
}

int GenConfig::resolved_grid() const {
  if (grid > 0) return grid;
  return problem == "eit" ? 32 : 29;
}

int GenConfig::resolved_sensors() const {
  if (n_sensors > 0) return n_sensors;
  return problem == "eit" ? 128 : 100;
}

const Matrix& Dataset::measurements() const {
  if (access_ != DatasetAccess::supervised)
    throw ConfigError("dataset opened coefficients-only; measurements are off limits");
  if (measurements_.size() == 0)
    throw ConfigError("dataset has no stored measurements");
  return measurements_;
}

const std::vector<GridField>& Dataset::solution_grids() const {
  if (access_ != DatasetAccess::supervised)
    throw ConfigError("dataset opened coefficients-only; solutions are off limits");
  if (solutions_.empty()) throw ConfigError("dataset has no stored solution grids");
  return solutions_;
}

ScalarFn Dataset::coefficient_fn(int i) const {
  if (i < 0 || i >= size()) throw DomainError("coefficient_fn: sample index out of range");
  if (problem == "darcy-continuous")
    return trig_permeability_fn(coeff_params(i, 0), coeff_params(i, 1));
  if (problem == "eit") {
    int K = static_cast<int>(coeff_params(i, 0));
    Vector c = coeff_params.row(i).segment(1, K).transpose();
    return eit_conductivity_fn(c);
  }
  return nearest_pixel_fn(std::make_shared<GridField>(coeffs[i]));
}

Dataset generate_dataset(const GenConfig& cfg) {
  cfg.validate();
  const int g = cfg.resolved_grid();
  const int m = cfg.resolved_sensors();
  const int N = cfg.n_samples;

  Dataset ds;
  ds.problem = cfg.problem;
  ds.sensors = cfg.problem == "eit"
                   ? place_boundary_sensors(m)
                   : place_interior_sensors(m, cfg.sensor_seed);

  ds.coeffs.reserve(N);
  if (cfg.problem == "darcy-continuous") ds.coeff_params.resize(N, 2);
  if (cfg.problem == "eit") ds.coeff_params.setZero(N, 6);
  for (int i = 0; i < N; ++i) {
    Rng rng = make_rng(cfg.seed, kStreamCoeff + static_cast<std::uint64_t>(i));
    if (cfg.problem == "darcy-continuous") {
      Vector2 w = sample_trig_omegas(rng, cfg.out_of_dist);
      ds.coeff_params.row(i) = w.transpose();
      ds.coeffs.push_back(sample_grid(trig_permeability_fn(w[0], w[1]), g, g));
    } else if (cfg.problem == "darcy-piecewise") {
      ds.coeffs.push_back(cutoff_gp_field(cfg.tau2, rng, g, g));
    } else {
      Vector c = sample_eit_coeffs(rng, cfg.out_of_dist);
      ds.coeff_params(i, 0) = static_cast<double>(c.size());
      ds.coeff_params.row(i).segment(1, c.size()) = c.transpose();
      ds.coeffs.push_back(sample_grid(eit_conductivity_fn(c), g, g));
    }
  }

  ds.meta["gen_config"] = {
      {"problem", cfg.problem},       {"n_samples", cfg.n_samples},
      {"grid", g},                    {"seed", cfg.seed},
      {"sensor_seed", cfg.sensor_seed}, {"out_of_dist", cfg.out_of_dist},
      {"with_solutions", cfg.with_solutions}, {"oracle_n", cfg.oracle_n},
      {"n_sensors", m},               {"tau2", cfg.tau2},
      {"f_const", cfg.f_const},
      {"keep_solution_grids", cfg.keep_solution_grids}};
  if (cfg.problem == "eit") ds.meta["patterns"] = kNumVoltagePatterns;

  if (!cfg.with_solutions) return ds;

  ds.access_ = DatasetAccess::supervised;
  if (is_darcy(cfg.problem)) {
    EllipticProblem pde;
    pde.f = constant_fn(cfg.f_const);
    pde.g = constant_fn(0.0);
    ds.measurements_.resize(N, m);
    for (int i = 0; i < N; ++i) {
      pde.a = ds.coefficient_fn(i);
      GridField u = solve_elliptic(pde, cfg.oracle_n);
      ds.measurements_.row(i) = sensor_sample(u, ds.sensors).transpose();
      if (cfg.keep_solution_grids) ds.solutions_.push_back(std::move(u));
    }
  } else {
    // EIT: currents for every (sample, voltage pattern) pair; full potential
    // grids are not kept, one per pattern would dwarf everything else.
    const int L = kNumVoltagePatterns;
    ds.measurements_.resize(static_cast<Eigen::Index>(N) * L, m);
    EllipticProblem pde;
    pde.f = constant_fn(0.0);
    for (int i = 0; i < N; ++i) {
      pde.a = ds.coefficient_fn(i);
      for (int l = 1; l <= L; ++l) {
        pde.g = boundary_voltage(l);
        GridField u = solve_elliptic(pde, cfg.oracle_n);
        ds.measurements_.row(static_cast<Eigen::Index>(i) * L + (l - 1)) =
            dtn_currents(u, pde.a, ds.sensors).transpose();
      }
    }
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  ContainerWriter out;
  out.set_meta(ds.meta);
  out.add("coeff", "coefficient", pack_fields(ds.coeffs), "synth");
  if (ds.coeff_params.size() > 0)
    out.add("coeff_params", "params",
            pack_matrix(ds.coeff_params,
                        {static_cast<std::size_t>(ds.coeff_params.rows()),
                         static_cast<std::size_t>(ds.coeff_params.cols())}),
            "synth");
  const auto m = static_cast<std::size_t>(ds.sensors.count());
  out.add("sensors_xy", "layout", pack_matrix(ds.sensors.xy, {m, 2}), "synth");
  Vector side(ds.sensors.count());
  for (int i = 0; i < ds.sensors.count(); ++i) side[i] = ds.sensors.side[i];
  out.add("sensors_side", "layout", DenseArray({m}, side), "synth");

  if (ds.has_measurements()) {
    std::vector<std::size_t> shape;
    if (ds.problem == "eit")
      shape = {static_cast<std::size_t>(ds.measurements_.rows()) / kNumVoltagePatterns,
               static_cast<std::size_t>(kNumVoltagePatterns), m};
    else
      shape = {static_cast<std::size_t>(ds.measurements_.rows()), m};
    out.add("measurements", "measurement",
            pack_matrix(ds.measurements_, std::move(shape)), "oracle");
  }
  if (ds.has_solution_grids())
    out.add("solutions", "solution", pack_fields(ds.solutions_), "oracle");
  out.write(path);
}

Dataset load_dataset(const std::string& path, DatasetAccess access) {
  ContainerReader in(path);
  Dataset ds;
  ds.meta = in.meta();
  if (!ds.meta.contains("gen_config"))
    throw IoError("'" + path + "' is not a dataset container");
  ds.problem = ds.meta["gen_config"]["problem"].get<std::string>();
  ds.coeffs = unpack_fields(in.read("coeff"));
  if (in.has("coeff_params")) {
    const auto& e = in.entry("coeff_params");
    ds.coeff_params = unpack_matrix(in.read("coeff_params"),
                                    static_cast<Eigen::Index>(e.shape[0]),
                                    static_cast<Eigen::Index>(e.shape[1]));
  }
  {
    const auto& e = in.entry("sensors_xy");
    ds.sensors.xy = unpack_matrix(in.read("sensors_xy"),
                                  static_cast<Eigen::Index>(e.shape[0]), 2);
    DenseArray side = in.read("sensors_side");
    ds.sensors.side.assign(side.data.begin(), side.data.end());
  }
  if (access == DatasetAccess::coefficients_only) return ds;

  if (!in.has("measurements"))
    throw IoError("'" + path + "' has no supervised channels; regenerate with solutions");
  ds.access_ = DatasetAccess::supervised;
  {
    const auto& e = in.entry("measurements");
    Eigen::Index rows = static_cast<Eigen::Index>(shape_numel(e.shape)) /
                        static_cast<Eigen::Index>(e.shape.back());
    ds.measurements_ = unpack_matrix(in.read("measurements"), rows,
                                     static_cast<Eigen::Index>(e.shape.back()));
  }
  if (in.has("solutions")) ds.solutions_ = unpack_fields(in.read("solutions"));
  return ds;
}

}  // namespace igno
