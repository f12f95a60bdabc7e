#include "igno/model.hpp"

#include <utility>

#include "igno/error.hpp"
#include "igno/mollifier.hpp"

namespace igno {

ModelConfig ModelConfig::for_problem(const std::string& name) {
  ModelConfig c;
  c.problem = name;
  if (name == "darcy-continuous") {
    c.grid = 29;
    c.conv_channels = {64, 64, 64};
    c.enc_hidden = {128, 128};
    c.enc_tf = {false, 2.1, 1.0};
    c.sol_depth = 6;
    c.coef_depth = 6;
  } else if (name == "darcy-piecewise") {
    c.grid = 29;
    c.conv_channels = {};
    c.enc_hidden = {512, 256};
    c.enc_tf = {false, 7.5, 2.5};
    c.sol_depth = 5;
    c.coef_depth = 5;
    c.coef_width = 256;
    c.coef_trunk_act = Act::silu_sin;
    c.coef_branch_act = Act::silu_id;
    c.coef_out = Act::sigmoid;
  } else if (name == "eit") {
    c.grid = 32;
    c.conv_channels = {64, 64, 64, 64};
    c.enc_hidden = {64, 64};
    c.enc_tf = {true, 0.0, 1.0};
    c.sol_depth = 5;
    c.coef_depth = 5;
    c.patterns = 20;
    c.f_const = 0.0;
  } else {
    throw ConfigError("ModelConfig: unknown problem " + name);
  }
  return c;
}

void ModelConfig::validate() const {
  if (problem != "darcy-continuous" && problem != "darcy-piecewise" && problem != "eit")
    throw ConfigError("ModelConfig: unknown problem " + problem);
  if (grid < 2) throw ConfigError("ModelConfig: grid too small");
  if (latent < 2 || latent % 2 != 0)
    throw ConfigError("ModelConfig: latent dim must be even and positive");
  if (sol_depth < 1 || coef_depth < 1 || sol_width < 1 || coef_width < 1)
    throw ConfigError("ModelConfig: decoder shape must be positive");
  if (patterns < 0) throw ConfigError("ModelConfig: negative pattern count");
  if (enc_tf.scale == 0.0) throw ConfigError("ModelConfig: zero input scale");
  if (coef_out == Act::sigmoid && phase_hi <= phase_lo)
    throw ConfigError("ModelConfig: phase coefficients must be ordered");
}

Json ModelConfig::to_json() const {
  Json j;
  j["problem"] = problem;
  j["grid"] = grid;
  j["latent"] = latent;
  j["conv_channels"] = conv_channels;
  j["enc_hidden"] = enc_hidden;
  j["enc_tf"] = {{"log", enc_tf.log}, {"shift", enc_tf.shift}, {"scale", enc_tf.scale}};
  j["sol"] = {{"depth", sol_depth}, {"width", sol_width}, {"act", act_name(sol_act)}};
  j["coef"] = {{"depth", coef_depth},
               {"width", coef_width},
               {"trunk_act", act_name(coef_trunk_act)},
               {"branch_act", act_name(coef_branch_act)},
               {"out", act_name(coef_out)}};
  j["phase"] = {{"lo", phase_lo}, {"hi", phase_hi}};
  j["patterns"] = patterns;
  j["f_const"] = f_const;
  j["weights"] = {{"pde", weights.pde}, {"bd", weights.bd}, {"rec", weights.rec}};
  return j;
}

ModelConfig ModelConfig::from_json(const Json& j) {
  ModelConfig c;
  c.problem = j.at("problem").get<std::string>();
  c.grid = j.at("grid").get<int>();
  c.latent = j.at("latent").get<int>();
  c.conv_channels = j.at("conv_channels").get<std::vector<int>>();
  c.enc_hidden = j.at("enc_hidden").get<std::vector<int>>();
  const Json& tf = j.at("enc_tf");
  c.enc_tf = {tf.at("log").get<bool>(), tf.at("shift").get<double>(),
              tf.at("scale").get<double>()};
  const Json& s = j.at("sol");
  c.sol_depth = s.at("depth").get<int>();
  c.sol_width = s.at("width").get<int>();
  c.sol_act = act_from_name(s.at("act").get<std::string>());
  const Json& a = j.at("coef");
  c.coef_depth = a.at("depth").get<int>();
  c.coef_width = a.at("width").get<int>();
  c.coef_trunk_act = act_from_name(a.at("trunk_act").get<std::string>());
  c.coef_branch_act = act_from_name(a.at("branch_act").get<std::string>());
  c.coef_out = act_from_name(a.at("out").get<std::string>());
  if (j.contains("phase")) {
    c.phase_lo = j.at("phase").at("lo").get<double>();
    c.phase_hi = j.at("phase").at("hi").get<double>();
  }
  c.patterns = j.at("patterns").get<int>();
  c.f_const = j.at("f_const").get<double>();
  const Json& w = j.at("weights");
  c.weights = {w.at("pde").get<double>(), w.at("bd").get<double>(),
               w.at("rec").get<double>()};
  c.validate();
  return c;
}

Matrix grid_points(int side) {
  if (side < 2) throw ConfigError("grid_points: side too small");
  Matrix pts(2, static_cast<Eigen::Index>(side) * side);
  const double h = 1.0 / (side - 1);
  for (int iy = 0; iy < side; ++iy)
    for (int ix = 0; ix < side; ++ix) {
      const Eigen::Index p = static_cast<Eigen::Index>(iy) * side + ix;
      pts(0, p) = ix * h;
      pts(1, p) = iy * h;
    }
  return pts;
}

IgnoModel::IgnoModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  enc_ = std::make_unique<CoeffEncoder>(cfg_.grid, cfg_.conv_channels, cfg_.enc_hidden,
                                        cfg_.latent, Act::silu, cfg_.enc_tf);
  sol_ = std::make_unique<MultiOnet>(cfg_.latent + cfg_.patterns, 2, cfg_.sol_depth,
                                     cfg_.sol_width, cfg_.sol_act, cfg_.sol_act);
  coef_ = std::make_unique<MultiOnet>(cfg_.latent, 2, cfg_.coef_depth, cfg_.coef_width,
                                      cfg_.coef_branch_act, cfg_.coef_trunk_act,
                                      cfg_.coef_out);
  sol_offset_ = enc_->param_count();
  coef_offset_ = sol_offset_ + sol_->param_count();
  count_ = coef_offset_ + coef_->param_count();
  rec_points_ = grid_points(cfg_.grid);
}

Eigen::Ref<const Vector> IgnoModel::enc_params(const Vector& p) const {
  return p.segment(0, enc_->param_count());
}

Eigen::Ref<const Vector> IgnoModel::sol_params(const Vector& p) const {
  return p.segment(sol_offset_, sol_->param_count());
}

Eigen::Ref<const Vector> IgnoModel::coef_params(const Vector& p) const {
  return p.segment(coef_offset_, coef_->param_count());
}

void IgnoModel::init(Vector& params, Rng& rng) const {
  params.resize(count_);
  enc_->init(params.segment(0, enc_->param_count()), rng);
  sol_->init(params.segment(sol_offset_, sol_->param_count()), rng);
  coef_->init(params.segment(coef_offset_, coef_->param_count()), rng);
}

IgnoModel::BatchLoss IgnoModel::batch_loss(const Vector& params, const Matrix& grids,
                                           const std::vector<int>& pattern,
                                           const Matrix& rec_target,
                                           const TestParticleSet& ps,
                                           Eigen::Ref<Vector> grad) const {
  if (params.size() != count_)
    throw ShapeError("IgnoModel::batch_loss: parameter size mismatch");
  const auto B = grids.cols();
  if (cfg_.patterns > 0 && static_cast<Eigen::Index>(pattern.size()) != B)
    throw ShapeError("IgnoModel::batch_loss: need one boundary pattern per item");
  if (cfg_.patterns == 0 && !pattern.empty())
    throw ShapeError("IgnoModel::batch_loss: model has no boundary patterns");
  if (rec_target.rows() != B || rec_target.cols() != rec_points_.cols())
    throw ShapeError("IgnoModel::batch_loss: reconstruction target shape mismatch");
  const bool with_grad = grad.size() > 0;
  if (with_grad && grad.size() != count_)
    throw ShapeError("IgnoModel::batch_loss: gradient size mismatch");

  CoeffEncoder::Trace enc_tr;
  Matrix codes = enc_->forward(enc_params(params), grids, enc_tr, with_grad);

  Matrix sol_codes;
  if (cfg_.patterns > 0) {
    std::vector<int> zero_based(pattern);
    for (int& l : zero_based) --l;
    sol_codes.resize(cfg_.latent + cfg_.patterns, B);
    sol_codes.topRows(cfg_.latent) = codes;
    sol_codes.bottomRows(cfg_.patterns) = one_hot_codes(zero_based, cfg_.patterns);
  } else {
    sol_codes = codes;
  }

  FfcnTrace sol_tt, coef_nodes_tt, coef_rec_tt;
  sol_->trunk_forward(sol_params(params), ps.nodes, 1, sol_tt, with_grad);
  coef_->trunk_forward(coef_params(params), ps.nodes, 0, coef_nodes_tt, with_grad);
  coef_->trunk_forward(coef_params(params), rec_points_, 0, coef_rec_tt, with_grad);

  MultiOnet::Trace sol_tr, coef_nodes_tr, coef_rec_tr;
  sol_->forward(sol_params(params), sol_codes, sol_tt, sol_tr, with_grad);
  coef_->forward(coef_params(params), codes, coef_nodes_tt, coef_nodes_tr, with_grad);
  coef_->forward(coef_params(params), codes, coef_rec_tt, coef_rec_tr, with_grad);

  Channels m = bubble_jet(ps.nodes, 1);
  Channels gdrive;
  if (cfg_.patterns > 0)
    gdrive = voltage_jet_rows(ps.nodes, pattern, cfg_.patterns, 1);
  Channels u;
  mollify(sol_tr.out, m, cfg_.patterns > 0 ? &gdrive : nullptr, u);

  // A probabilistic phase decoder feeds the residual through the physical
  // coefficient it encodes, not the raw probability.
  const bool phase = cfg_.coef_out == Act::sigmoid;
  const double span = cfg_.phase_hi - cfg_.phase_lo;
  Matrix a_nodes = phase
                       ? (cfg_.phase_lo + span * coef_nodes_tr.out.v.array()).matrix()
                       : coef_nodes_tr.out.v;

  BatchLoss out;
  Matrix r = weak_residuals(ps, a_nodes, u, cfg_.f_const);
  Matrix rbar;
  out.pde = residual_loss(r, ps.znorm, with_grad ? &rbar : nullptr);
  Matrix rec_bar;
  out.rec = cfg_.coef_out == Act::sigmoid
                ? bce_loss(coef_rec_tr.out.v, rec_target, with_grad ? &rec_bar : nullptr)
                : mse_loss(coef_rec_tr.out.v, rec_target, with_grad ? &rec_bar : nullptr);
  out.bd = 0.0;  // boundary conditions hold exactly through the mollifier
  out.total = cfg_.weights.pde * out.pde + cfg_.weights.bd * out.bd +
              cfg_.weights.rec * out.rec;
  if (!with_grad) return out;

  rbar *= cfg_.weights.pde;
  Matrix a_nodes_adj;
  Channels u_adj;
  weak_residual_adjoint(ps, a_nodes, u, rbar, a_nodes_adj, u_adj);
  if (phase) a_nodes_adj *= span;
  Channels G_adj;
  mollify_adjoint(u_adj, m, G_adj);

  auto sol_grad = grad.segment(sol_offset_, sol_->param_count());
  Matrix sol_codes_adj;
  sol_->backward(sol_params(params), sol_tr, sol_tt, G_adj, sol_grad, &sol_codes_adj);

  auto coef_grad = grad.segment(coef_offset_, coef_->param_count());
  Matrix codes_adj_nodes, codes_adj_rec;
  coef_->backward(coef_params(params), coef_nodes_tr, coef_nodes_tt,
                  value_input(std::move(a_nodes_adj)), coef_grad, &codes_adj_nodes);
  rec_bar *= cfg_.weights.rec;
  coef_->backward(coef_params(params), coef_rec_tr, coef_rec_tt,
                  value_input(std::move(rec_bar)), coef_grad, &codes_adj_rec);

  Matrix codes_adj = codes_adj_nodes + codes_adj_rec;
  codes_adj += sol_codes_adj.topRows(cfg_.latent);
  auto enc_grad = grad.segment(0, enc_->param_count());
  enc_->backward(enc_params(params), enc_tr, codes_adj, enc_grad);
  return out;
}

Matrix IgnoModel::encode(const Vector& params, const Matrix& grids) const {
  if (params.size() != count_)
    throw ShapeError("IgnoModel::encode: parameter size mismatch");
  CoeffEncoder::Trace tr;
  return enc_->forward(enc_params(params), grids, tr, false);
}

Matrix IgnoModel::coefficient_values(const Vector& params, const Matrix& codes,
                                     const Matrix& points) const {
  FfcnTrace tt;
  coef_->trunk_forward(coef_params(params), points, 0, tt, false);
  MultiOnet::Trace tr;
  coef_->forward(coef_params(params), codes, tt, tr, false);
  return tr.out.v;
}

Channels IgnoModel::solution_jets(const Vector& params, const Matrix& codes,
                                  const std::vector<int>& pattern, const Matrix& points,
                                  int order) const {
  Matrix sol_codes;
  if (cfg_.patterns > 0) {
    if (static_cast<Eigen::Index>(pattern.size()) != codes.cols())
      throw ShapeError("IgnoModel::solution_jets: need one pattern per code");
    std::vector<int> zero_based(pattern);
    for (int& l : zero_based) --l;
    sol_codes.resize(cfg_.latent + cfg_.patterns, codes.cols());
    sol_codes.topRows(cfg_.latent) = codes;
    sol_codes.bottomRows(cfg_.patterns) = one_hot_codes(zero_based, cfg_.patterns);
  } else {
    if (!pattern.empty())
      throw ShapeError("IgnoModel::solution_jets: model has no boundary patterns");
    sol_codes = codes;
  }
  FfcnTrace tt;
  sol_->trunk_forward(sol_params(params), points, order, tt, false);
  MultiOnet::Trace tr;
  sol_->forward(sol_params(params), sol_codes, tt, tr, false);

  Channels m = bubble_jet(points, order);
  Channels u;
  if (cfg_.patterns > 0) {
    Channels g = voltage_jet_rows(points, pattern, cfg_.patterns, order);
    mollify(tr.out, m, &g, u);
  } else {
    mollify(tr.out, m, nullptr, u);
  }
  return u;
}

void save_bundle(const ModelBundle& bundle, const std::string& path) {
  ContainerWriter out;
  Json meta;
  meta["format"] = "igno-model";
  meta["config"] = bundle.config.to_json();
  meta["info"] = bundle.meta.is_null() ? Json::object() : bundle.meta;
  out.set_meta(meta);
  out.add("params", "params",
          DenseArray({static_cast<std::size_t>(bundle.params.size())}, bundle.params),
          "trained");
  out.write(path);
}

ModelBundle load_bundle(const std::string& path) {
  ContainerReader in(path);
  const Json& meta = in.meta();
  if (!meta.contains("format") || meta.at("format") != "igno-model")
    throw IoError("load_bundle: " + path + " is not a model container");
  ModelBundle b;
  b.config = ModelConfig::from_json(meta.at("config"));
  b.meta = meta.contains("info") ? meta.at("info") : Json::object();
  DenseArray params = in.read("params");
  b.params = params.data;
  IgnoModel check(b.config);
  if (b.params.size() != check.param_count())
    throw IoError("load_bundle: parameter vector does not match the config");
  return b;
}

}  // namespace igno
