#include "igno/inversion.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "igno/error.hpp"
#include "igno/mollifier.hpp"
#include "igno/oracle.hpp"
#include "igno/trainer.hpp"

namespace igno {

namespace {

constexpr std::uint64_t kParticleStream = 0x1a87;
constexpr std::uint64_t kInitStream = 0xf10a;

Matrix outward_normals(const SensorLayout& sensors) {
  Matrix n(2, sensors.count());
  for (int i = 0; i < sensors.count(); ++i) {
    switch (sensors.side[i]) {
      case 0: n.col(i) << 0.0, -1.0; break;
      case 1: n.col(i) << 1.0, 0.0; break;
      case 2: n.col(i) << 0.0, 1.0; break;
      case 3: n.col(i) << -1.0, 0.0; break;
      default:
        throw DomainError("LatentObjective: current data needs boundary probes");
    }
  }
  return n;
}

}  // namespace

InversionConfig InversionConfig::for_problem(const std::string& problem,
                                             bool out_of_dist) {
  InversionConfig c;
  if (problem == "darcy-continuous") {
    c.steps = 500;
    c.lr = 0.01;
    c.lr_factor = 2.0 / 3.0;
    c.lr_period = 250;
    c.rho_data = 1.0;
    c.rho_pde = 50.0;
  } else if (problem == "darcy-piecewise") {
    c.steps = 500;
    c.lr = 0.1;
    c.lr_factor = 0.5;
    c.lr_period = 50;
    c.rho_data = 1.0;
    c.rho_pde = 1.0;
  } else if (problem == "eit") {
    c.steps = 200;
    c.rho_pde = 100.0;
    if (out_of_dist) {
      // Weak data pull: measurements from outside the training family mostly
      // steer the start, the residual keeps the code on the learned manifold.
      c.lr = 0.01;
      c.lr_factor = 2.0 / 3.0;
      c.lr_period = 100;
      c.rho_data = 0.001;
    } else {
      c.lr = 0.01;
      c.lr_factor = 0.5;
      c.lr_period = 25;
      c.rho_data = 1.0;
    }
  } else {
    throw ConfigError("InversionConfig: unknown problem " + problem);
  }
  return c;
}

void InversionConfig::validate() const {
  if (steps < 1) throw ConfigError("InversionConfig: need at least one step");
  if (lr <= 0.0) throw ConfigError("InversionConfig: learning rate must be positive");
  if (lr_factor <= 0.0 || lr_factor > 1.0)
    throw ConfigError("InversionConfig: lr factor must lie in (0, 1]");
  if (lr_period < 1) throw ConfigError("InversionConfig: lr period must be positive");
  if (rho_data < 0.0 || rho_pde < 0.0)
    throw ConfigError("InversionConfig: weights must be nonnegative");
  if (particles < 1) throw ConfigError("InversionConfig: need test particles");
  if (particle_radius <= 0.0 || particle_radius >= 0.5)
    throw ConfigError("InversionConfig: particle radius must lie in (0, 0.5)");
}

struct LatentObjective::Impl {
  const IgnoModel* model = nullptr;
  Vector params;
  InversionConfig cfg;
  bool eit = false;
  bool phase = false;
  double span = 0.0;
  int latent = 0;
  int patterns = 0;
  Matrix onehot;    // patterns x patterns drive block
  Matrix normals;   // 2 x m outward normals at boundary probes
  Matrix sens_pts;  // 2 x m
  Matrix meas;
  TestParticleSet ps;
  Channels m_nodes, m_sens;
  Channels gdrive_nodes, gdrive_sens;
  FfcnTrace sol_nodes_tt, coef_nodes_tt, sol_sens_tt, coef_sens_tt;
};

LatentObjective::LatentObjective(const IgnoModel& model, const Vector& params,
                                 const SensorLayout& sensors,
                                 const Matrix& measurements,
                                 const InversionConfig& cfg)
    : impl_(std::make_unique<Impl>()) {
  cfg.validate();
  if (params.size() != model.param_count())
    throw ShapeError("LatentObjective: parameter size mismatch");
  if (sensors.count() < 1) throw ShapeError("LatentObjective: no sensors");
  Impl& im = *impl_;
  im.model = &model;
  im.params = params;
  im.cfg = cfg;
  const ModelConfig& mc = model.config();
  im.latent = mc.latent;
  im.patterns = mc.patterns;
  im.eit = mc.patterns > 0;
  im.phase = mc.coef_out == Act::sigmoid;
  im.span = mc.phase_hi - mc.phase_lo;
  im.sens_pts = sensors.xy.transpose();
  im.meas = measurements;
  const Eigen::Index m = sensors.count();
  if (im.eit) {
    if (measurements.rows() != im.patterns || measurements.cols() != m)
      throw ShapeError("LatentObjective: need one current row per drive pattern");
    im.normals = outward_normals(sensors);
    std::vector<int> drives(im.patterns);
    std::iota(drives.begin(), drives.end(), 0);
    im.onehot = one_hot_codes(drives, im.patterns);
  } else {
    if (measurements.rows() != 1 || measurements.cols() != m)
      throw ShapeError("LatentObjective: need one value row over the sensors");
  }

  Rng rng = make_rng(cfg.seed, kParticleStream);
  im.ps = sample_particles(cfg.particles, cfg.particle_radius, rng);
  im.m_nodes = bubble_jet(im.ps.nodes, 1);
  const int sens_order = im.eit ? 1 : 0;
  im.m_sens = bubble_jet(im.sens_pts, sens_order);
  if (im.eit) {
    std::vector<int> all(im.patterns);
    std::iota(all.begin(), all.end(), 1);
    im.gdrive_nodes = voltage_jet_rows(im.ps.nodes, all, im.patterns, 1);
    im.gdrive_sens = voltage_jet_rows(im.sens_pts, all, im.patterns, 1);
  }

  // The decoders are frozen, so the trunk side of every evaluation point is
  // fixed too; retain the traces once and only rerun the branch nets per step.
  const auto sol_p = model.sol_params(im.params);
  const auto coef_p = model.coef_params(im.params);
  model.sol_decoder().trunk_forward(sol_p, im.ps.nodes, 1, im.sol_nodes_tt, true);
  model.coef_decoder().trunk_forward(coef_p, im.ps.nodes, 0, im.coef_nodes_tt, true);
  model.sol_decoder().trunk_forward(sol_p, im.sens_pts, sens_order, im.sol_sens_tt,
                                    true);
  if (im.eit)
    model.coef_decoder().trunk_forward(coef_p, im.sens_pts, 0, im.coef_sens_tt, true);
}

LatentObjective::~LatentObjective() = default;

const TestParticleSet& LatentObjective::particles() const { return impl_->ps; }

double LatentObjective::eval(const Vector& code, Vector* grad, double* data_term,
                             double* pde_term) const {
  const Impl& im = *impl_;
  const IgnoModel& model = *im.model;
  if (code.size() != im.latent)
    throw ShapeError("LatentObjective::eval: code size mismatch");
  const bool with_grad = grad != nullptr;
  const auto sol_p = model.sol_params(im.params);
  const auto coef_p = model.coef_params(im.params);
  const MultiOnet& sol = model.sol_decoder();
  const MultiOnet& coef = model.coef_decoder();
  const Eigen::Index L = im.eit ? im.patterns : 1;

  Matrix codes1(im.latent, 1);
  codes1.col(0) = code;
  Matrix sol_codes;
  if (im.eit) {
    sol_codes.resize(im.latent + im.patterns, L);
    sol_codes.topRows(im.latent).colwise() = code;
    sol_codes.bottomRows(im.patterns) = im.onehot;
  } else {
    sol_codes = codes1;
  }

  MultiOnet::Trace sol_nodes_tr, coef_nodes_tr, sol_sens_tr, coef_sens_tr;
  sol.forward(sol_p, sol_codes, im.sol_nodes_tt, sol_nodes_tr, with_grad);
  coef.forward(coef_p, codes1, im.coef_nodes_tt, coef_nodes_tr, with_grad);
  sol.forward(sol_p, sol_codes, im.sol_sens_tt, sol_sens_tr, with_grad);
  if (im.eit) coef.forward(coef_p, codes1, im.coef_sens_tt, coef_sens_tr, with_grad);

  Channels u_nodes, u_sens;
  mollify(sol_nodes_tr.out, im.m_nodes, im.eit ? &im.gdrive_nodes : nullptr, u_nodes);
  mollify(sol_sens_tr.out, im.m_sens, im.eit ? &im.gdrive_sens : nullptr, u_sens);

  const ModelConfig& mc = model.config();
  Matrix a_row = im.phase
                     ? (mc.phase_lo + im.span * coef_nodes_tr.out.v.array()).matrix()
                     : coef_nodes_tr.out.v;
  Matrix a_nodes = im.eit ? Matrix(a_row.replicate(L, 1)) : a_row;

  Matrix r = weak_residuals(im.ps, a_nodes, u_nodes, mc.f_const);
  Matrix rbar;
  const double pde = residual_loss(r, im.ps.znorm, with_grad ? &rbar : nullptr);

  double data = 0.0;
  Matrix pbar, gamma, flux;
  if (im.eit) {
    gamma = coef_sens_tr.out.v;  // conductivity at the probes, 1 x m
    flux = (u_sens.x.array().rowwise() * im.normals.row(0).array() +
            u_sens.y.array().rowwise() * im.normals.row(1).array())
               .matrix();
    Matrix pred = (flux.array().rowwise() * gamma.row(0).array()).matrix();
    data = mse_loss(pred, im.meas, with_grad ? &pbar : nullptr);
  } else {
    data = mse_loss(u_sens.v, im.meas, with_grad ? &pbar : nullptr);
  }

  if (data_term) *data_term = data;
  if (pde_term) *pde_term = pde;
  const double total = im.cfg.rho_data * data + im.cfg.rho_pde * pde;
  if (!with_grad) return total;

  rbar *= im.cfg.rho_pde;
  Matrix a_adj;
  Channels u_nodes_adj;
  weak_residual_adjoint(im.ps, a_nodes, u_nodes, rbar, a_adj, u_nodes_adj);
  Matrix a_row_adj = im.eit ? Matrix(a_adj.colwise().sum()) : std::move(a_adj);
  if (im.phase) a_row_adj *= im.span;
  Channels G_nodes_adj;
  mollify_adjoint(u_nodes_adj, im.m_nodes, G_nodes_adj);

  Matrix sc_nodes, c_nodes, sc_sens, c_sens;
  sol.backward(sol_p, sol_nodes_tr, im.sol_nodes_tt, G_nodes_adj, no_grad(),
               &sc_nodes);
  coef.backward(coef_p, coef_nodes_tr, im.coef_nodes_tt,
                value_input(std::move(a_row_adj)), no_grad(), &c_nodes);

  pbar *= im.cfg.rho_data;
  if (im.eit) {
    Matrix gamma_adj = (pbar.array() * flux.array()).colwise().sum().matrix();
    Matrix scaled = (pbar.array().rowwise() * gamma.row(0).array()).matrix();
    Channels u_sens_adj;
    u_sens_adj.order = 1;
    u_sens_adj.v = Matrix::Zero(L, im.sens_pts.cols());
    u_sens_adj.x = (scaled.array().rowwise() * im.normals.row(0).array()).matrix();
    u_sens_adj.y = (scaled.array().rowwise() * im.normals.row(1).array()).matrix();
    Channels G_sens_adj;
    mollify_adjoint(u_sens_adj, im.m_sens, G_sens_adj);
    sol.backward(sol_p, sol_sens_tr, im.sol_sens_tt, G_sens_adj, no_grad(), &sc_sens);
    coef.backward(coef_p, coef_sens_tr, im.coef_sens_tt,
                  value_input(std::move(gamma_adj)), no_grad(), &c_sens);
  } else {
    Channels G_sens_adj;
    mollify_adjoint(value_input(std::move(pbar)), im.m_sens, G_sens_adj);
    sol.backward(sol_p, sol_sens_tr, im.sol_sens_tt, G_sens_adj, no_grad(), &sc_sens);
  }

  Vector g = sc_nodes.topRows(im.latent).rowwise().sum() +
             sc_sens.topRows(im.latent).rowwise().sum() + c_nodes.col(0);
  if (im.eit) g += c_sens.col(0);
  *grad = std::move(g);
  return total;
}

InversionResult invert(const IgnoModel& model, const Vector& params,
                       const SensorLayout& sensors, const Matrix& measurements,
                       const CouplingFlow* flow, const Vector* flow_params,
                       const InversionConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  LatentObjective obj(model, params, sensors, measurements, cfg);
  const int latent = model.config().latent;

  Vector code = Vector::Zero(latent);
  if (flow != nullptr) {
    if (flow_params == nullptr)
      throw ConfigError("invert: flow prior passed without parameters");
    if (flow->config().dim != latent)
      throw ShapeError("invert: flow dimension does not match the latent code");
    Rng rng = make_rng(cfg.seed, kInitStream);
    Matrix z(latent, 1);
    for (Eigen::Index i = 0; i < latent; ++i) z(i, 0) = standard_normal(rng);
    code = flow->inverse(*flow_params, z).col(0);
  }

  std::ofstream csv;
  if (!cfg.trajectory_csv.empty()) {
    csv.open(cfg.trajectory_csv, std::ios::trunc);
    if (!csv) throw IoError("invert: cannot write " + cfg.trajectory_csv);
    csv << std::setprecision(17) << "step,lr,objective,data,pde\n";
  }

  Adam adam(latent);
  Vector grad(latent);
  InversionResult res;
  for (int step = 1; step <= cfg.steps; ++step) {
    const double f = obj.eval(code, &grad, &res.data_term, &res.pde_term);
    if (!std::isfinite(f))
      throw NumericError("invert",
                         "objective not finite at step " + std::to_string(step));
    const double lr = cfg.lr * std::pow(cfg.lr_factor, step / cfg.lr_period);
    if (csv.is_open())
      csv << step << ',' << lr << ',' << f << ',' << res.data_term << ','
          << res.pde_term << '\n';
    adam.step(code, grad, lr);
  }
  res.objective = obj.eval(code, nullptr, &res.data_term, &res.pde_term);
  res.code = std::move(code);
  res.steps_run = cfg.steps;
  res.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

GridField recovered_coefficient(const IgnoModel& model, const Vector& params,
                                const Vector& code, int side) {
  if (code.size() != model.config().latent)
    throw ShapeError("recovered_coefficient: code size mismatch");
  Matrix codes(code.size(), 1);
  codes.col(0) = code;
  Matrix vals = model.coefficient_values(params, codes, grid_points(side));
  GridField out(side, side);
  const ModelConfig& mc = model.config();
  if (mc.coef_out == Act::sigmoid) {
    for (Eigen::Index i = 0; i < vals.cols(); ++i)
      out.values[i] = vals(0, i) > 0.5 ? mc.phase_hi : mc.phase_lo;
  } else {
    out.values = vals.row(0).transpose();
  }
  return out;
}

}  // namespace igno
