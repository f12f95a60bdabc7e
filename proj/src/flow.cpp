#include "igno/flow.hpp"

#include <cmath>

#include "igno/error.hpp"
#include "igno/trainer.hpp"

namespace igno {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

// s = 2 tanh(raw) and its derivative with respect to raw.
Matrix squash(const Matrix& raw) { return (2.0 * raw.array().tanh()).matrix(); }
Matrix squash_d(const Matrix& s) { return (2.0 - 0.5 * s.array().square()).matrix(); }

}  // namespace

void FlowConfig::validate() const {
  if (dim < 2 || dim % 2 != 0) throw ConfigError("FlowConfig: dim must be even and >= 2");
  if (steps < 1) throw ConfigError("FlowConfig: need at least one coupling step");
  if (hidden < 1) throw ConfigError("FlowConfig: hidden width must be positive");
}

Json FlowConfig::to_json() const {
  return Json{{"dim", dim}, {"steps", steps}, {"hidden", hidden}};
}

FlowConfig FlowConfig::from_json(const Json& j) {
  FlowConfig c;
  if (j.contains("dim")) c.dim = j.at("dim").get<int>();
  if (j.contains("steps")) c.steps = j.at("steps").get<int>();
  if (j.contains("hidden")) c.hidden = j.at("hidden").get<int>();
  c.validate();
  return c;
}

CouplingFlow::CouplingFlow(FlowConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  const int half = cfg_.dim / 2;
  s_net_ = Ffcn({half, cfg_.hidden, cfg_.hidden, half}, Act::silu, Act::identity);
  t_net_ = Ffcn({half, cfg_.hidden, cfg_.hidden, half}, Act::silu, Act::identity);
  net_count_ = s_net_.param_count();
  count_ = cfg_.steps * 2 * net_count_;
}

Eigen::Ref<const Vector> CouplingFlow::step_params(Eigen::Ref<const Vector> p,
                                                   int step, bool scale_net) const {
  const int base = step * 2 * net_count_ + (scale_net ? 0 : net_count_);
  return p.segment(base, net_count_);
}

void CouplingFlow::split(const Matrix& v, int step, Matrix& a, Matrix& b) const {
  const int half = cfg_.dim / 2;
  if (step % 2 == 0) {
    a = v.topRows(half);
    b = v.bottomRows(half);
  } else {
    a = v.bottomRows(half);
    b = v.topRows(half);
  }
}

void CouplingFlow::merge(const Matrix& a, const Matrix& b, int step, Matrix& v) const {
  const int half = cfg_.dim / 2;
  v.resize(cfg_.dim, a.cols());
  if (step % 2 == 0) {
    v.topRows(half) = a;
    v.bottomRows(half) = b;
  } else {
    v.bottomRows(half) = a;
    v.topRows(half) = b;
  }
}

void CouplingFlow::init(Vector& params, Rng& rng) const {
  params.resize(count_);
  const int half = cfg_.dim / 2;
  const int last = cfg_.hidden * half + half;  // identity start
  for (int k = 0; k < cfg_.steps; ++k) {
    auto s_seg = params.segment(k * 2 * net_count_, net_count_);
    auto t_seg = params.segment(k * 2 * net_count_ + net_count_, net_count_);
    s_net_.init(s_seg, rng);
    t_net_.init(t_seg, rng);
    s_seg.tail(last).setZero();
    t_seg.tail(last).setZero();
  }
}

Matrix CouplingFlow::forward(Eigen::Ref<const Vector> p, const Matrix& x,
                             Vector* log_det) const {
  if (x.rows() != cfg_.dim) throw ShapeError("CouplingFlow::forward: row count");
  if (p.size() != count_) throw ShapeError("CouplingFlow::forward: parameter size");
  Matrix u = x;
  if (log_det) log_det->setZero(x.cols());
  FfcnTrace tr;
  for (int k = 0; k < cfg_.steps; ++k) {
    Matrix a, b;
    split(u, k, a, b);
    s_net_.forward(step_params(p, k, true), value_input(a), 0, tr, false);
    Matrix s = squash(tr.out.back().v);
    t_net_.forward(step_params(p, k, false), value_input(a), 0, tr, false);
    Matrix nb = (b.array() * s.array().exp() + tr.out.back().v.array()).matrix();
    if (log_det) *log_det += s.colwise().sum().transpose();
    merge(a, nb, k, u);
  }
  return u;
}

Matrix CouplingFlow::inverse(Eigen::Ref<const Vector> p, const Matrix& z) const {
  if (z.rows() != cfg_.dim) throw ShapeError("CouplingFlow::inverse: row count");
  if (p.size() != count_) throw ShapeError("CouplingFlow::inverse: parameter size");
  Matrix u = z;
  FfcnTrace tr;
  for (int k = cfg_.steps - 1; k >= 0; --k) {
    Matrix a, b;
    split(u, k, a, b);
    s_net_.forward(step_params(p, k, true), value_input(a), 0, tr, false);
    Matrix s = squash(tr.out.back().v);
    t_net_.forward(step_params(p, k, false), value_input(a), 0, tr, false);
    Matrix ob = ((b.array() - tr.out.back().v.array()) * (-s.array()).exp()).matrix();
    merge(a, ob, k, u);
  }
  return u;
}

Vector CouplingFlow::log_prob(Eigen::Ref<const Vector> p, const Matrix& x) const {
  Vector log_det;
  Matrix z = forward(p, x, &log_det);
  return (-0.5 * z.colwise().squaredNorm().transpose().array() -
          0.5 * cfg_.dim * kLog2Pi + log_det.array())
      .matrix();
}

double CouplingFlow::nll(Eigen::Ref<const Vector> p, const Matrix& x,
                         Eigen::Ref<Vector> grad) const {
  if (grad.size() == 0) return -log_prob(p, x).mean();
  if (x.rows() != cfg_.dim) throw ShapeError("CouplingFlow::nll: row count");
  if (grad.size() != count_) throw ShapeError("CouplingFlow::nll: gradient size");

  struct StepTrace {
    FfcnTrace s, t;
    Matrix u_b, scale;
  };
  const auto n = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<StepTrace> steps(cfg_.steps);
  Matrix u = x;
  double log_det = 0;
  for (int k = 0; k < cfg_.steps; ++k) {
    StepTrace& st = steps[k];
    Matrix a, b;
    split(u, k, a, b);
    Channels in = value_input(a);
    s_net_.forward(step_params(p, k, true), in, 0, st.s, true);
    t_net_.forward(step_params(p, k, false), in, 0, st.t, true);
    st.scale = squash(st.s.out.back().v);
    st.u_b = b;
    Matrix nb = (b.array() * st.scale.array().exp() + st.t.out.back().v.array()).matrix();
    log_det += st.scale.sum();
    merge(a, nb, k, u);
  }
  const double loss =
      inv_n * (0.5 * u.squaredNorm() - log_det) + 0.5 * cfg_.dim * kLog2Pi;

  Matrix ubar = inv_n * u;
  const int layers = s_net_.layers();
  for (int k = cfg_.steps - 1; k >= 0; --k) {
    StepTrace& st = steps[k];
    Matrix abar, bbar;
    split(ubar, k, abar, bbar);
    Matrix es = st.scale.array().exp().matrix();
    Matrix sbar = (bbar.array() * st.u_b.array() * es.array() - inv_n).matrix();
    Matrix rawbar = (sbar.array() * squash_d(st.scale).array()).matrix();

    std::vector<Channels> adj(layers);
    Channels in_adj;
    adj.back() = value_input(rawbar);
    auto s_grad = grad.segment(k * 2 * net_count_, net_count_);
    s_net_.backward(step_params(p, k, true), st.s, adj, s_grad, &in_adj);
    Matrix uabar = abar + in_adj.v;

    adj.back() = value_input(bbar);
    auto t_grad = grad.segment(k * 2 * net_count_ + net_count_, net_count_);
    t_net_.backward(step_params(p, k, false), st.t, adj, t_grad, &in_adj);
    uabar += in_adj.v;

    Matrix ubbar = (bbar.array() * es.array()).matrix();
    merge(uabar, ubbar, k, ubar);
  }
  return loss;
}

void FlowTrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("FlowTrainConfig: epochs must be positive");
  if (lr <= 0) throw ConfigError("FlowTrainConfig: bad learning rate");
}

FlowTrainResult train_flow(const CouplingFlow& flow, Vector& params,
                           const Matrix& data, const FlowTrainConfig& cfg) {
  cfg.validate();
  if (params.size() != flow.param_count())
    throw ShapeError("train_flow: parameter size mismatch");
  if (data.cols() < 2) throw ConfigError("train_flow: need at least two samples");

  Adam opt(params.size());
  Vector grad(params.size());
  FlowTrainResult res;
  std::vector<std::vector<std::string>> rows;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    grad.setZero();
    const double loss = flow.nll(params, data, grad);
    if (!std::isfinite(loss))
      throw NumericError("train_flow", "non-finite likelihood at epoch " +
                                           std::to_string(epoch));
    if (epoch == 1) res.first_nll = loss;
    res.final_nll = loss;
    res.epochs_run = epoch;
    if (!cfg.loss_csv.empty())
      rows.push_back({std::to_string(epoch), csv_number(loss)});
    opt.step(params, grad, cfg.lr);
  }
  if (!cfg.loss_csv.empty()) write_csv(cfg.loss_csv, {"epoch", "nll"}, rows);
  return res;
}

Matrix sample_flow(const CouplingFlow& flow, const Vector& params, int n, Rng& rng) {
  if (n < 1) throw ConfigError("sample_flow: need at least one draw");
  Matrix z(flow.config().dim, n);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = standard_normal(rng);
  return flow.inverse(params, z);
}

void save_flow(const FlowBundle& bundle, const std::string& path) {
  ContainerWriter out;
  Json meta;
  meta["format"] = "igno-flow";
  meta["config"] = bundle.config.to_json();
  meta["info"] = bundle.meta.is_null() ? Json::object() : bundle.meta;
  out.set_meta(meta);
  out.add("params", "params",
          DenseArray({static_cast<std::size_t>(bundle.params.size())}, bundle.params),
          "trained");
  out.write(path);
}

FlowBundle load_flow(const std::string& path) {
  ContainerReader in(path);
  const Json& meta = in.meta();
  if (!meta.contains("format") || meta.at("format") != "igno-flow")
    throw IoError("load_flow: " + path + " is not a flow container");
  FlowBundle b;
  b.config = FlowConfig::from_json(meta.at("config"));
  b.meta = meta.contains("info") ? meta.at("info") : Json::object();
  DenseArray params = in.read("params");
  b.params = params.data;
  CouplingFlow check(b.config);
  if (b.params.size() != check.param_count())
    throw IoError("load_flow: parameter vector does not match the config");
  return b;
}

}  // namespace igno
