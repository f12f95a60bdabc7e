#include "igno/encoder.hpp"

#include <cmath>

#include "igno/error.hpp"

namespace igno {

Matrix InputTransform::apply(const Matrix& v) const {
  Matrix out = v;
  if (log) {
    if (v.size() > 0 && v.minCoeff() <= 0.0)
      throw DomainError("InputTransform: log of a non-positive field");
    out = out.array().log();
  }
  out.array() -= shift;
  out /= scale;
  return out;
}

CoeffEncoder::CoeffEncoder(int grid_size, std::vector<int> conv_channels,
                           std::vector<int> hidden, int latent_dim, Act hidden_act,
                           InputTransform tf)
    : tf_(tf), grid_(grid_size), latent_(latent_dim) {
  if (grid_size < 2) throw ConfigError("CoeffEncoder: grid too small");
  if (latent_dim < 1) throw ConfigError("CoeffEncoder: latent dim must be positive");
  if (tf.scale == 0.0) throw ConfigError("CoeffEncoder: zero input scale");
  int head_in = grid_size * grid_size;
  if (!conv_channels.empty()) {
    conv_.emplace(grid_size, 1, std::move(conv_channels), 3, 2, hidden_act);
    conv_count_ = conv_->param_count();
    head_in = conv_->out_dim();
  }
  std::vector<int> widths{head_in};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(latent_dim);
  head_.emplace(std::move(widths), hidden_act, Act::tanh);
}

void CoeffEncoder::init(Eigen::Ref<Vector> params, Rng& rng) const {
  if (params.size() != param_count())
    throw ShapeError("CoeffEncoder::init: parameter size mismatch");
  if (conv_) conv_->init(params.segment(0, conv_count_), rng);
  head_->init(params.segment(conv_count_, head_->param_count()), rng);
}

Matrix CoeffEncoder::forward(Eigen::Ref<const Vector> params, const Matrix& grids,
                             Trace& trace, bool retain) const {
  if (params.size() != param_count())
    throw ShapeError("CoeffEncoder::forward: parameter size mismatch");
  if (grids.rows() != in_dim())
    throw ShapeError("CoeffEncoder::forward: grid rows mismatch");
  Matrix z = tf_.apply(grids);
  if (conv_)
    z = conv_->forward(params.segment(0, conv_count_), z, trace.conv, retain);
  head_->forward(params.segment(conv_count_, head_->param_count()), value_input(std::move(z)),
                 0, trace.head, retain);
  return trace.head.out.back().v;
}

void CoeffEncoder::backward(Eigen::Ref<const Vector> params, const Trace& trace,
                            const Matrix& latent_adj, Eigen::Ref<Vector> grad) const {
  if (grad.size() != param_count())
    throw ShapeError("CoeffEncoder::backward: gradient size mismatch");
  std::vector<Channels> layer_adj(head_->layers());
  layer_adj.back() = value_input(latent_adj);
  Channels in_adj;
  auto head_grad = grad.segment(conv_count_, head_->param_count());
  head_->backward(params.segment(conv_count_, head_->param_count()), trace.head,
                  layer_adj, head_grad, conv_ ? &in_adj : nullptr);
  if (conv_) {
    auto conv_grad = grad.segment(0, conv_count_);
    conv_->backward(params.segment(0, conv_count_), trace.conv, in_adj.v, conv_grad);
  }
}

Matrix one_hot_codes(const std::vector<int>& labels, int num_classes) {
  Matrix out = Matrix::Zero(num_classes, static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw DomainError("one_hot_codes: label out of range");
    out(labels[i], static_cast<Eigen::Index>(i)) = 1.0;
  }
  return out;
}

}  // namespace igno
