#include "igno/nn.hpp"

#include <cmath>

#include "igno/error.hpp"

namespace igno {

Channels value_input(Matrix v) {
  Channels c;
  c.order = 0;
  c.v = std::move(v);
  return c;
}

Channels point_input(const Matrix& xy, int order) {
  if (xy.rows() != 2) throw ShapeError("point_input: expected 2 x B coordinates");
  Channels c;
  c.order = order;
  c.v = xy;
  if (order >= 1) {
    c.x = Matrix::Zero(2, xy.cols());
    c.y = Matrix::Zero(2, xy.cols());
    c.x.row(0).setOnes();
    c.y.row(1).setOnes();
  }
  if (order >= 2) {
    c.xx = Matrix::Zero(2, xy.cols());
    c.yy = Matrix::Zero(2, xy.cols());
  }
  return c;
}

void act_tables(Act act, const Matrix& s, Matrix* d0, Matrix* d1, Matrix* d2,
                Matrix* d3) {
  const auto rows = s.rows(), cols = s.cols();
  if (d0) d0->resize(rows, cols);
  if (d1) d1->resize(rows, cols);
  if (d2) d2->resize(rows, cols);
  if (d3) d3->resize(rows, cols);
  const double* in = s.data();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    ActDerivs r = act_derivs(act, in[i]);
    if (d0) d0->data()[i] = r.d0;
    if (d1) d1->data()[i] = r.d1;
    if (d2) d2->data()[i] = r.d2;
    if (d3) d3->data()[i] = r.d3;
  }
}

void act_apply(const Channels& s, const Matrix& d0, const Matrix& d1,
               const Matrix& d2, Channels& o) {
  o.order = s.order;
  o.v = d0;
  if (s.order >= 1) {
    o.x = d1.array() * s.x.array();
    o.y = d1.array() * s.y.array();
  }
  if (s.order >= 2) {
    o.xx = d2.array() * s.x.array().square() + d1.array() * s.xx.array();
    o.yy = d2.array() * s.y.array().square() + d1.array() * s.yy.array();
  }
}

void act_adjoint(const Channels& o_adj, const Channels& s, const Matrix& d1,
                 const Matrix& d2, const Matrix& d3, Channels& s_adj) {
  const int order = s.order;
  s_adj.order = order;
  s_adj.v = o_adj.v.array() * d1.array();
  if (order >= 1) {
    s_adj.x = o_adj.x.array() * d1.array();
    s_adj.y = o_adj.y.array() * d1.array();
    s_adj.v.array() += o_adj.x.array() * d2.array() * s.x.array() +
                       o_adj.y.array() * d2.array() * s.y.array();
  }
  if (order >= 2) {
    s_adj.x.array() += 2.0 * o_adj.xx.array() * d2.array() * s.x.array();
    s_adj.y.array() += 2.0 * o_adj.yy.array() * d2.array() * s.y.array();
    s_adj.xx = o_adj.xx.array() * d1.array();
    s_adj.yy = o_adj.yy.array() * d1.array();
    s_adj.v.array() +=
        o_adj.xx.array() * (d3.array() * s.x.array().square() + d2.array() * s.xx.array()) +
        o_adj.yy.array() * (d3.array() * s.y.array().square() + d2.array() * s.yy.array());
  }
}

Ffcn::Ffcn(std::vector<int> widths, Act hidden, Act out_act)
    : widths_(std::move(widths)), hidden_(hidden), out_act_(out_act) {
  if (widths_.size() < 2) throw ConfigError("Ffcn needs at least one layer");
  for (int w : widths_)
    if (w < 1) throw ConfigError("Ffcn widths must be positive");
  for (int k = 0; k < layers(); ++k) {
    w_offset_.push_back(count_);
    count_ += widths_[k + 1] * widths_[k];
    b_offset_.push_back(count_);
    count_ += widths_[k + 1];
  }
}

Act Ffcn::activation(int layer) const {
  return layer + 1 == layers() ? out_act_ : hidden_;
}

void Ffcn::init(Eigen::Ref<Vector> params, Rng& rng) const {
  if (params.size() != count_) throw ShapeError("Ffcn::init: parameter size mismatch");
  for (int k = 0; k < layers(); ++k) {
    const int fan_in = widths_[k], fan_out = widths_[k + 1];
    const double lim = std::sqrt(6.0 / (fan_in + fan_out));
    for (int i = 0; i < fan_out * fan_in; ++i)
      params[w_offset_[k] + i] = uniform_real(rng, -lim, lim);
    params.segment(b_offset_[k], fan_out).setZero();
  }
}

Eigen::Map<const Matrix> Ffcn::weight(Eigen::Ref<const Vector> p, int layer) const {
  return {p.data() + w_offset_[layer], widths_[layer + 1], widths_[layer]};
}

Eigen::Map<const Vector> Ffcn::bias(Eigen::Ref<const Vector> p, int layer) const {
  return {p.data() + b_offset_[layer], widths_[layer + 1]};
}

void Ffcn::forward(Eigen::Ref<const Vector> p, const Channels& input, int order,
                   FfcnTrace& trace, bool retain) const {
  if (p.size() != count_) throw ShapeError("Ffcn::forward: parameter size mismatch");
  if (input.v.rows() != in_dim())
    throw ShapeError("Ffcn::forward: input has " + std::to_string(input.v.rows()) +
                     " rows, expected " + std::to_string(in_dim()));
  if (input.order < order)
    throw ShapeError("Ffcn::forward: input carries lower order than requested");

  const int l = layers();
  trace.order = order;
  trace.retained = retain;
  trace.out.assign(l + 1, Channels{});
  trace.pre.assign(l, Channels{});
  trace.d1.assign(l, Matrix{});
  trace.d2.assign(l, Matrix{});
  trace.d3.assign(l, Matrix{});
  trace.out[0] = input;
  trace.out[0].order = order;

  const bool need_d1 = order >= 1 || retain;
  const bool need_d2 = order >= 2 || (retain && order >= 1);
  const bool need_d3 = retain && order >= 2;

  for (int k = 0; k < l; ++k) {
    const auto W = weight(p, k);
    const auto b = bias(p, k);
    const Channels& z = trace.out[k];
    Channels s;
    s.order = order;
    s.v.noalias() = W * z.v;
    s.v.colwise() += b;
    if (order >= 1) {
      s.x.noalias() = W * z.x;
      s.y.noalias() = W * z.y;
    }
    if (order >= 2) {
      s.xx.noalias() = W * z.xx;
      s.yy.noalias() = W * z.yy;
    }

    Matrix d0;
    act_tables(activation(k), s.v, &d0, need_d1 ? &trace.d1[k] : nullptr,
               need_d2 ? &trace.d2[k] : nullptr, need_d3 ? &trace.d3[k] : nullptr);
    act_apply(s, d0, trace.d1[k], trace.d2[k], trace.out[k + 1]);
    if (retain && order >= 1) {
      trace.pre[k].order = order;
      trace.pre[k].x = std::move(s.x);
      trace.pre[k].y = std::move(s.y);
      if (order >= 2) {
        trace.pre[k].xx = std::move(s.xx);
        trace.pre[k].yy = std::move(s.yy);
      }
    }
  }
}

namespace {

void add_into(Matrix& dst, const Matrix& src) {
  if (src.size() == 0) return;
  if (dst.size() == 0)
    dst = src;
  else
    dst += src;
}

void add_channels(Channels& dst, const Channels& src) {
  add_into(dst.v, src.v);
  add_into(dst.x, src.x);
  add_into(dst.y, src.y);
  add_into(dst.xx, src.xx);
  add_into(dst.yy, src.yy);
}

// Zero-fill any channel block the sweep expects but the adjoint lacks.
void complete(Channels& c, int order, Eigen::Index rows, Eigen::Index cols) {
  c.order = order;
  if (c.v.size() == 0) c.v = Matrix::Zero(rows, cols);
  if (order >= 1) {
    if (c.x.size() == 0) c.x = Matrix::Zero(rows, cols);
    if (c.y.size() == 0) c.y = Matrix::Zero(rows, cols);
  }
  if (order >= 2) {
    if (c.xx.size() == 0) c.xx = Matrix::Zero(rows, cols);
    if (c.yy.size() == 0) c.yy = Matrix::Zero(rows, cols);
  }
}

}  // namespace

void Ffcn::backward(Eigen::Ref<const Vector> p, const FfcnTrace& trace,
                    const std::vector<Channels>& layer_adj, Eigen::Ref<Vector> grad,
                    Channels* input_adj) const {
  if (!trace.retained) throw ConfigError("Ffcn::backward needs a retained trace");
  if (static_cast<int>(layer_adj.size()) != layers())
    throw ShapeError("Ffcn::backward: need one adjoint slot per layer");
  const bool with_params = grad.size() > 0;
  if (with_params && grad.size() != count_)
    throw ShapeError("Ffcn::backward: gradient size mismatch");

  const int order = trace.order;
  Channels a;  // adjoint of trace.out[k+1] while handling layer k
  for (int k = layers() - 1; k >= 0; --k) {
    add_channels(a, layer_adj[k]);
    const Channels& z = trace.out[k];
    complete(a, order, trace.out[k + 1].v.rows(), trace.out[k + 1].v.cols());

    Channels sbar;
    act_adjoint(a, trace.pre[k], trace.d1[k], trace.d2[k], trace.d3[k], sbar);

    const auto W = weight(p, k);
    if (with_params) {
      Eigen::Map<Matrix> Wbar(grad.data() + w_offset_[k], widths_[k + 1], widths_[k]);
      Eigen::Map<Vector> bbar(grad.data() + b_offset_[k], widths_[k + 1]);
      Wbar.noalias() += sbar.v * z.v.transpose();
      if (order >= 1) {
        Wbar.noalias() += sbar.x * z.x.transpose();
        Wbar.noalias() += sbar.y * z.y.transpose();
      }
      if (order >= 2) {
        Wbar.noalias() += sbar.xx * z.xx.transpose();
        Wbar.noalias() += sbar.yy * z.yy.transpose();
      }
      bbar += sbar.v.rowwise().sum();
    }

    Channels next;
    next.order = order;
    if (k > 0 || input_adj) {
      next.v.noalias() = W.transpose() * sbar.v;
      if (order >= 1) {
        next.x.noalias() = W.transpose() * sbar.x;
        next.y.noalias() = W.transpose() * sbar.y;
      }
      if (order >= 2) {
        next.xx.noalias() = W.transpose() * sbar.xx;
        next.yy.noalias() = W.transpose() * sbar.yy;
      }
    }
    a = std::move(next);
  }
  if (input_adj) *input_adj = std::move(a);
}

}  // namespace igno
