#pragma once

#include <vector>

#include "igno/activation.hpp"
#include "igno/array.hpp"
#include "igno/rng.hpp"

namespace igno {

// Batched spatial-jet channels. `v` holds values (features x columns); for
// order >= 1 the first spatial tangents d/dx, d/dy ride along, for order 2
// also the pure second derivatives. Residual assembly differentiates network
// outputs with respect to the trunk coordinates this way, with no taping.
struct Channels {
  int order = 0;
  Matrix v, x, y, xx, yy;

  bool empty() const { return v.size() == 0; }
};

// Value-only input block (columns are batch items).
Channels value_input(Matrix v);

// Coordinate input: xy is 2 x B with rows (x, y); tangents are the unit
// directions, second derivatives vanish.
Channels point_input(const Matrix& xy, int order);

// Per-layer record of one forward pass, kept around for the adjoint sweep.
struct FfcnTrace {
  int order = 0;
  bool retained = false;
  std::vector<Channels> out;  // out[0] is the input, out[k] layer k's output
  std::vector<Channels> pre;  // tangent parts of the pre-activations
  std::vector<Matrix> d1, d2, d3;  // activation derivatives at pre-activation
};

// Dense stack over a caller-owned flat parameter vector. Layer k maps
// widths[k] -> widths[k+1] with the hidden activation, the final layer uses
// out_act. Parameters are stored [W0 b0 W1 b1 ...], W column-major.
class Ffcn {
 public:
  Ffcn() = default;
  Ffcn(std::vector<int> widths, Act hidden, Act out_act);

  int layers() const { return static_cast<int>(widths_.size()) - 1; }
  int in_dim() const { return widths_.front(); }
  int out_dim() const { return widths_.back(); }
  int width(int layer) const { return widths_[layer + 1]; }
  Act activation(int layer) const;
  int param_count() const { return count_; }

  // Glorot-uniform weights, zero biases.
  void init(Eigen::Ref<Vector> params, Rng& rng) const;

  Eigen::Map<const Matrix> weight(Eigen::Ref<const Vector> p, int layer) const;
  Eigen::Map<const Vector> bias(Eigen::Ref<const Vector> p, int layer) const;

  // retain = true caches the extra activation derivatives and pre-activation
  // tangents that backward() needs.
  void forward(Eigen::Ref<const Vector> p, const Channels& input, int order,
               FfcnTrace& trace, bool retain) const;

  // Reverse sweep. layer_adj[k] is the adjoint of layer k's output (empty
  // channel blocks mean zero). Parameter gradients accumulate into grad
  // unless it is empty; the input adjoint lands in *input_adj when given.
  void backward(Eigen::Ref<const Vector> p, const FfcnTrace& trace,
                const std::vector<Channels>& layer_adj, Eigen::Ref<Vector> grad,
                Channels* input_adj = nullptr) const;

 private:
  std::vector<int> widths_;
  Act hidden_ = Act::tanh_sin;
  Act out_act_ = Act::identity;
  std::vector<int> w_offset_, b_offset_;
  int count_ = 0;
};

// Activation derivative tables for a whole block; null outputs are skipped.
void act_tables(Act act, const Matrix& s, Matrix* d0, Matrix* d1,
                Matrix* d2 = nullptr, Matrix* d3 = nullptr);

// Jet composition o = f(s) for a block: value channel through f, tangents by
// the chain rule. d1/d2 must match the requested order.
void act_apply(const Channels& s, const Matrix& d0, const Matrix& d1,
               const Matrix& d2, Channels& o);

// Adjoint of act_apply: given the adjoint of o, accumulate the adjoint of s.
void act_adjoint(const Channels& o_adj, const Channels& s, const Matrix& d1,
                 const Matrix& d2, const Matrix& d3, Channels& s_adj);

// Writable empty vector passed where parameter gradients are not wanted.
inline Eigen::Ref<Vector> no_grad() {
  static Vector empty;
  return empty;
}

}  // namespace igno
