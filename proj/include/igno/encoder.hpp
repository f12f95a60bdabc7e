#pragma once

#include <optional>
#include <vector>

#include "igno/conv.hpp"
#include "igno/nn.hpp"

namespace igno {

// Elementwise normalization applied to raw coefficient grids before they
// reach the encoder weights: v -> ((log ? ln v : v) - shift) / scale.
struct InputTransform {
  bool log = false;
  double shift = 0.0;
  double scale = 1.0;

  Matrix apply(const Matrix& v) const;
};

// Coefficient grid -> latent code. Either a conv stack feeding a dense head,
// or a dense net on the flattened grid when conv_channels is empty. The head
// ends in tanh so codes live in (-1, 1)^d.
class CoeffEncoder {
 public:
  CoeffEncoder(int grid_size, std::vector<int> conv_channels, std::vector<int> hidden,
               int latent_dim, Act hidden_act = Act::silu, InputTransform tf = {});

  int grid_size() const { return grid_; }
  int in_dim() const { return grid_ * grid_; }
  int latent_dim() const { return latent_; }
  bool has_conv() const { return conv_.has_value(); }
  int param_count() const { return conv_count_ + head_->param_count(); }
  const InputTransform& transform() const { return tf_; }

  void init(Eigen::Ref<Vector> params, Rng& rng) const;

  struct Trace {
    ConvStack::Trace conv;
    FfcnTrace head;
  };

  // grids: in_dim x B raw field values, one flattened grid per column.
  // Returns latent_dim x B.
  Matrix forward(Eigen::Ref<const Vector> params, const Matrix& grids, Trace& trace,
                 bool retain) const;
  void backward(Eigen::Ref<const Vector> params, const Trace& trace,
                const Matrix& latent_adj, Eigen::Ref<Vector> grad) const;

 private:
  InputTransform tf_;
  std::optional<ConvStack> conv_;
  std::optional<Ffcn> head_;
  int grid_ = 0, latent_ = 0, conv_count_ = 0;
};

// One-hot codes for categorical conditioning, one column per label.
Matrix one_hot_codes(const std::vector<int>& labels, int num_classes);

}  // namespace igno
