#pragma once

#include <vector>

#include "igno/activation.hpp"
#include "igno/array.hpp"
#include "igno/rng.hpp"

namespace igno {

// Strided convolution stack over square images, zero padding sized so every
// layer maps side n to ceil(n / stride). All layers share kernel, stride and
// activation; images travel as flat columns, channel-fast pixel-slow.
class ConvStack {
 public:
  ConvStack(int in_size, int in_ch, std::vector<int> channels, int kernel = 3,
            int stride = 2, Act act = Act::silu);

  int layers() const { return static_cast<int>(ch_.size()) - 1; }
  int size(int layer) const { return size_[layer]; }
  int channels(int layer) const { return ch_[layer]; }
  int in_dim() const { return ch_.front() * size_.front() * size_.front(); }
  int out_dim() const { return ch_.back() * size_.back() * size_.back(); }
  int param_count() const { return count_; }

  void init(Eigen::Ref<Vector> params, Rng& rng) const;

  // Filter bank of one layer as out_ch x (k*k*in_ch). The kernel offset is
  // the slow index within a column block, so patch columns stay contiguous.
  Eigen::Map<const Matrix> weight(Eigen::Ref<const Vector> params, int layer) const;
  Eigen::Map<const Vector> bias(Eigen::Ref<const Vector> params, int layer) const;

  struct Trace {
    int batch = 0;
    bool retained = false;
    std::vector<Matrix> feat;  // feat[k]: ch_[k] x (size_[k]^2 * batch)
    std::vector<Matrix> d1;    // activation slopes per layer
  };

  // input: in_dim x B. Returns out_dim x B in the same packing.
  Matrix forward(Eigen::Ref<const Vector> params, const Matrix& input, Trace& trace,
                 bool retain) const;
  void backward(Eigen::Ref<const Vector> params, const Trace& trace,
                const Matrix& out_adj, Eigen::Ref<Vector> grad) const;

 private:
  Matrix im2col(const Matrix& feat, int layer, int batch) const;

  std::vector<int> ch_, size_, pad_, w_offset_, b_offset_;
  int kernel_, stride_;
  Act act_;
  int count_ = 0;
};

}  // namespace igno
