#include "igno/multionet.hpp"

#include "igno/error.hpp"

namespace igno {

namespace {

std::vector<int> stack_widths(int in, int depth, int width) {
  std::vector<int> w(depth + 1, width);
  w[0] = in;
  return w;
}

}  // namespace

MultiOnet::MultiOnet(int branch_in, int trunk_in, int depth, int width,
                     Act branch_act, Act trunk_act, Act out_act)
    : branch_(stack_widths(branch_in, depth, width), branch_act, branch_act),
      trunk_(stack_widths(trunk_in, depth, width), trunk_act, trunk_act),
      out_act_(out_act),
      depth_(depth) {
  if (depth < 1) throw ConfigError("MultiOnet needs depth >= 1");
  trunk_offset_ = branch_.param_count();
  w_offset_ = trunk_offset_ + trunk_.param_count();
  b0_offset_ = w_offset_ + depth_;
  count_ = b0_offset_ + 1;
}

void MultiOnet::init(Eigen::Ref<Vector> params, Rng& rng) const {
  if (params.size() != count_) throw ShapeError("MultiOnet::init: parameter size mismatch");
  branch_.init(params.segment(0, branch_.param_count()), rng);
  trunk_.init(params.segment(trunk_offset_, trunk_.param_count()), rng);
  params.segment(w_offset_, depth_).setOnes();
  params[b0_offset_] = 0.0;
}

Eigen::Ref<const Vector> MultiOnet::branch_params(Eigen::Ref<const Vector> p) const {
  return p.segment(0, branch_.param_count());
}

Eigen::Ref<const Vector> MultiOnet::trunk_params(Eigen::Ref<const Vector> p) const {
  return p.segment(trunk_offset_, trunk_.param_count());
}

Eigen::Ref<const Vector> MultiOnet::mix_weights(Eigen::Ref<const Vector> p) const {
  return p.segment(w_offset_, depth_);
}

void MultiOnet::trunk_forward(Eigen::Ref<const Vector> p, const Matrix& points, int order,
                              FfcnTrace& trunk_trace, bool retain) const {
  if (p.size() != count_) throw ShapeError("MultiOnet: parameter size mismatch");
  trunk_.forward(trunk_params(p), point_input(points, order), order,
                 trunk_trace, retain);
}

void MultiOnet::forward(Eigen::Ref<const Vector> p, const Matrix& codes,
                        const FfcnTrace& trunk_trace, Trace& trace,
                        bool retain) const {
  if (p.size() != count_) throw ShapeError("MultiOnet: parameter size mismatch");
  branch_.forward(branch_params(p), value_input(codes), 0, trace.branch, retain);

  const int order = trunk_trace.order;
  const auto nb = codes.cols();
  const auto nt = trunk_trace.out[0].v.cols();
  const auto w = mix_weights(p);

  Channels& mix = trace.mix;
  mix.order = order;
  mix.v.setConstant(nb, nt, mix_bias(p));
  if (order >= 1) {
    mix.x.setZero(nb, nt);
    mix.y.setZero(nb, nt);
  }
  if (order >= 2) {
    mix.xx.setZero(nb, nt);
    mix.yy.setZero(nb, nt);
  }
  for (int k = 0; k < depth_; ++k) {
    const double c = w[k] / depth_;
    const Matrix& bk = trace.branch.out[k + 1].v;
    const Channels& tk = trunk_trace.out[k + 1];
    mix.v.noalias() += c * bk.transpose() * tk.v;
    if (order >= 1) {
      mix.x.noalias() += c * bk.transpose() * tk.x;
      mix.y.noalias() += c * bk.transpose() * tk.y;
    }
    if (order >= 2) {
      mix.xx.noalias() += c * bk.transpose() * tk.xx;
      mix.yy.noalias() += c * bk.transpose() * tk.yy;
    }
  }

  if (out_act_ == Act::identity) {
    trace.out = mix;
    return;
  }
  const bool need_d2 = order >= 2 || (retain && order >= 1);
  const bool need_d3 = retain && order >= 2;
  act_tables(out_act_, mix.v, &trace.od0, &trace.od1,
             need_d2 ? &trace.od2 : nullptr, need_d3 ? &trace.od3 : nullptr);
  act_apply(mix, trace.od0, trace.od1, trace.od2, trace.out);
}

void MultiOnet::backward(Eigen::Ref<const Vector> p, const Trace& trace,
                         const FfcnTrace& trunk_trace, const Channels& out_adj,
                         Eigen::Ref<Vector> grad, Matrix* codes_adj) const {
  if (p.size() != count_) throw ShapeError("MultiOnet: parameter size mismatch");
  const bool with_params = grad.size() > 0;
  if (with_params && grad.size() != count_)
    throw ShapeError("MultiOnet::backward: gradient size mismatch");
  const int order = trunk_trace.order;
  const auto nb = trace.mix.v.rows();
  const auto nt = trace.mix.v.cols();

  // Missing adjoint blocks mean zero.
  Channels oadj = out_adj;
  oadj.order = order;
  if (oadj.v.size() == 0) oadj.v = Matrix::Zero(nb, nt);
  if (order >= 1) {
    if (oadj.x.size() == 0) oadj.x = Matrix::Zero(nb, nt);
    if (oadj.y.size() == 0) oadj.y = Matrix::Zero(nb, nt);
  }
  if (order >= 2) {
    if (oadj.xx.size() == 0) oadj.xx = Matrix::Zero(nb, nt);
    if (oadj.yy.size() == 0) oadj.yy = Matrix::Zero(nb, nt);
  }

  // Through the output activation.
  Channels mbar;
  if (out_act_ == Act::identity)
    mbar = std::move(oadj);
  else
    act_adjoint(oadj, trace.mix, trace.od1, trace.od2, trace.od3, mbar);

  const auto w = mix_weights(p);
  if (with_params) grad[b0_offset_] += mbar.v.sum();

  std::vector<Channels> branch_adj(depth_);
  std::vector<Channels> trunk_adj(with_params ? depth_ : 0);
  for (int k = 0; k < depth_; ++k) {
    const Matrix& bk = trace.branch.out[k + 1].v;
    const Channels& tk = trunk_trace.out[k + 1];
    Matrix gk;
    gk.noalias() = tk.v * mbar.v.transpose();
    if (order >= 1) {
      gk.noalias() += tk.x * mbar.x.transpose();
      gk.noalias() += tk.y * mbar.y.transpose();
    }
    if (order >= 2) {
      gk.noalias() += tk.xx * mbar.xx.transpose();
      gk.noalias() += tk.yy * mbar.yy.transpose();
    }
    gk /= depth_;
    if (with_params) grad[w_offset_ + k] += (bk.array() * gk.array()).sum();
    branch_adj[k].v = w[k] * gk;
    if (with_params) {
      const double c = w[k] / depth_;
      Channels& ta = trunk_adj[k];
      ta.order = order;
      ta.v.noalias() = c * bk * mbar.v;
      if (order >= 1) {
        ta.x.noalias() = c * bk * mbar.x;
        ta.y.noalias() = c * bk * mbar.y;
      }
      if (order >= 2) {
        ta.xx.noalias() = c * bk * mbar.xx;
        ta.yy.noalias() = c * bk * mbar.yy;
      }
    }
  }

  Channels input_adj;
  Channels* ia = codes_adj ? &input_adj : nullptr;
  if (with_params) {
    auto bseg = grad.segment(0, branch_.param_count());
    branch_.backward(branch_params(p), trace.branch, branch_adj, bseg, ia);
    auto tseg = grad.segment(trunk_offset_, trunk_.param_count());
    trunk_.backward(trunk_params(p), trunk_trace, trunk_adj, tseg, nullptr);
  } else {
    branch_.backward(branch_params(p), trace.branch, branch_adj, no_grad(), ia);
  }
  if (codes_adj) *codes_adj = std::move(input_adj.v);
}

}  // namespace igno
