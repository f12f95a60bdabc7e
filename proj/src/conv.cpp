#include "igno/conv.hpp"

#include <cmath>

#include "igno/error.hpp"
#include "igno/nn.hpp"

namespace igno {

ConvStack::ConvStack(int in_size, int in_ch, std::vector<int> channels, int kernel,
                     int stride, Act act)
    : kernel_(kernel), stride_(stride), act_(act) {
  if (in_size < 1 || in_ch < 1 || kernel < 1 || stride < 1)
    throw ConfigError("ConvStack: sizes must be positive");
  if (channels.empty()) throw ConfigError("ConvStack: needs at least one layer");
  ch_.push_back(in_ch);
  size_.push_back(in_size);
  for (int c : channels) {
    if (c < 1) throw ConfigError("ConvStack: channel counts must be positive");
    const int in = size_.back();
    const int out = (in + stride - 1) / stride;
    const int pad_total = std::max((out - 1) * stride + kernel - in, 0);
    pad_.push_back(pad_total / 2);
    ch_.push_back(c);
    size_.push_back(out);
  }
  for (int k = 0; k < layers(); ++k) {
    w_offset_.push_back(count_);
    count_ += ch_[k + 1] * kernel_ * kernel_ * ch_[k];
    b_offset_.push_back(count_);
    count_ += ch_[k + 1];
  }
}

void ConvStack::init(Eigen::Ref<Vector> params, Rng& rng) const {
  if (params.size() != count_)
    throw ShapeError("ConvStack::init: parameter size mismatch");
  const int kk = kernel_ * kernel_;
  for (int k = 0; k < layers(); ++k) {
    const int fan_in = ch_[k] * kk, fan_out = ch_[k + 1] * kk;
    const double lim = std::sqrt(6.0 / (fan_in + fan_out));
    const int nw = ch_[k + 1] * kk * ch_[k];
    for (int i = 0; i < nw; ++i)
      params[w_offset_[k] + i] = uniform_real(rng, -lim, lim);
    params.segment(b_offset_[k], ch_[k + 1]).setZero();
  }
}

Eigen::Map<const Matrix> ConvStack::weight(Eigen::Ref<const Vector> p, int layer) const {
  return {p.data() + w_offset_[layer], ch_[layer + 1],
          static_cast<Eigen::Index>(kernel_) * kernel_ * ch_[layer]};
}

Eigen::Map<const Vector> ConvStack::bias(Eigen::Ref<const Vector> p, int layer) const {
  return {p.data() + b_offset_[layer], ch_[layer + 1]};
}

Matrix ConvStack::im2col(const Matrix& feat, int layer, int batch) const {
  const int C = ch_[layer], H = size_[layer], O = size_[layer + 1];
  const int pad = pad_[layer], k = kernel_, s = stride_;
  Matrix col = Matrix::Zero(static_cast<Eigen::Index>(C) * k * k,
                            static_cast<Eigen::Index>(O) * O * batch);
  for (int b = 0; b < batch; ++b) {
    const Eigen::Index fbase = static_cast<Eigen::Index>(b) * H * H;
    const Eigen::Index cbase = static_cast<Eigen::Index>(b) * O * O;
    for (int oy = 0; oy < O; ++oy)
      for (int ox = 0; ox < O; ++ox) {
        const Eigen::Index cc = cbase + oy * O + ox;
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy * s + ky - pad;
          if (iy < 0 || iy >= H) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ox * s + kx - pad;
            if (ix < 0 || ix >= H) continue;
            col.block((ky * k + kx) * C, cc, C, 1) = feat.col(fbase + iy * H + ix);
          }
        }
      }
  }
  return col;
}

Matrix ConvStack::forward(Eigen::Ref<const Vector> p, const Matrix& input,
                          Trace& trace, bool retain) const {
  if (p.size() != count_)
    throw ShapeError("ConvStack::forward: parameter size mismatch");
  if (input.rows() != in_dim())
    throw ShapeError("ConvStack::forward: input has " + std::to_string(input.rows()) +
                     " rows, expected " + std::to_string(in_dim()));
  const int B = static_cast<int>(input.cols());
  trace.batch = B;
  trace.retained = retain;
  trace.feat.assign(layers() + 1, Matrix{});
  trace.d1.assign(layers(), Matrix{});
  trace.feat[0] = Eigen::Map<const Matrix>(
      input.data(), ch_[0], static_cast<Eigen::Index>(size_[0]) * size_[0] * B);

  for (int k = 0; k < layers(); ++k) {
    Matrix col = im2col(trace.feat[k], k, B);
    Matrix s = weight(p, k) * col;
    s.colwise() += bias(p, k);
    Matrix d0;
    act_tables(act_, s, &d0, retain ? &trace.d1[k] : nullptr, nullptr, nullptr);
    trace.feat[k + 1] = std::move(d0);
  }
  return Eigen::Map<const Matrix>(trace.feat.back().data(), out_dim(), B);
}

void ConvStack::backward(Eigen::Ref<const Vector> p, const Trace& trace,
                         const Matrix& out_adj, Eigen::Ref<Vector> grad) const {
  if (!trace.retained) throw ConfigError("ConvStack::backward needs a retained trace");
  if (grad.size() != count_)
    throw ShapeError("ConvStack::backward: gradient size mismatch");
  if (out_adj.rows() != out_dim() || out_adj.cols() != trace.batch)
    throw ShapeError("ConvStack::backward: adjoint shape mismatch");
  const int B = trace.batch;

  Matrix obar = Eigen::Map<const Matrix>(
      out_adj.data(), ch_.back(),
      static_cast<Eigen::Index>(size_.back()) * size_.back() * B);
  for (int k = layers() - 1; k >= 0; --k) {
    Matrix sbar = obar.array() * trace.d1[k].array();
    Matrix col = im2col(trace.feat[k], k, B);
    Eigen::Map<Matrix> Wbar(grad.data() + w_offset_[k], ch_[k + 1],
                            static_cast<Eigen::Index>(kernel_) * kernel_ * ch_[k]);
    Eigen::Map<Vector> bbar(grad.data() + b_offset_[k], ch_[k + 1]);
    Wbar.noalias() += sbar * col.transpose();
    bbar += sbar.rowwise().sum();

    if (k == 0) break;
    Matrix colbar = weight(p, k).transpose() * sbar;
    const int C = ch_[k], H = size_[k], O = size_[k + 1];
    const int pad = pad_[k], kk = kernel_, s = stride_;
    Matrix prev = Matrix::Zero(C, static_cast<Eigen::Index>(H) * H * B);
    for (int b = 0; b < B; ++b) {
      const Eigen::Index fbase = static_cast<Eigen::Index>(b) * H * H;
      const Eigen::Index cbase = static_cast<Eigen::Index>(b) * O * O;
      for (int oy = 0; oy < O; ++oy)
        for (int ox = 0; ox < O; ++ox) {
          const Eigen::Index cc = cbase + oy * O + ox;
          for (int ky = 0; ky < kk; ++ky) {
            const int iy = oy * s + ky - pad;
            if (iy < 0 || iy >= H) continue;
            for (int kx = 0; kx < kk; ++kx) {
              const int ix = ox * s + kx - pad;
              if (ix < 0 || ix >= H) continue;
              prev.col(fbase + iy * H + ix) += colbar.block((ky * kk + kx) * C, cc, C, 1);
            }
          }
        }
    }
    obar = std::move(prev);
  }
}

}  // namespace igno
