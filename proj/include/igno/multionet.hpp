#pragma once

#include "igno/nn.hpp"

namespace igno {

// Operator decoder combining a branch stack over latent codes with a trunk
// stack over spatial points. Every hidden depth contributes: the output is
// the depth-averaged, weighted inner product of branch and trunk features,
//
//   G(beta)(x) = out_act( (1/l) sum_k w_k <b_k(beta), t_k(x)> + b0 ),
//
// so a single forward serves a whole batch of codes at a shared point set.
// Parameter layout: [branch | trunk | w_1..w_l | b0], w_k start at one and
// b0 at zero.
class MultiOnet {
 public:
  MultiOnet() = default;
  MultiOnet(int branch_in, int trunk_in, int depth, int width, Act branch_act,
            Act trunk_act, Act out_act = Act::identity);

  const Ffcn& branch() const { return branch_; }
  const Ffcn& trunk() const { return trunk_; }
  int depth() const { return depth_; }
  int param_count() const { return count_; }
  Act out_act() const { return out_act_; }

  void init(Eigen::Ref<Vector> params, Rng& rng) const;

  Eigen::Ref<const Vector> branch_params(Eigen::Ref<const Vector> p) const;
  Eigen::Ref<const Vector> trunk_params(Eigen::Ref<const Vector> p) const;
  Eigen::Ref<const Vector> mix_weights(Eigen::Ref<const Vector> p) const;
  double mix_bias(Eigen::Ref<const Vector> p) const { return p[b0_offset_]; }

  struct Trace {
    FfcnTrace branch;
    Channels mix;  // combined channels before the output activation
    Matrix od0, od1, od2, od3;
    Channels out;  // codes x points
  };

  // Trunk features at a shared point set (2 x Nt); reusable across codes.
  void trunk_forward(Eigen::Ref<const Vector> p, const Matrix& points, int order,
                     FfcnTrace& trunk_trace, bool retain) const;

  // Combines branch codes (branch_in x Nb) with precomputed trunk features.
  void forward(Eigen::Ref<const Vector> p, const Matrix& codes,
               const FfcnTrace& trunk_trace, Trace& trace, bool retain) const;

  // Adjoint sweep. out_adj blocks are Nb x Nt (missing blocks mean zero).
  // grad accumulates the full parameter gradient unless empty; when empty the
  // trunk sweep is skipped entirely (used when only code sensitivities are
  // needed, e.g. latent-space inversion over frozen decoders).
  void backward(Eigen::Ref<const Vector> p, const Trace& trace,
                const FfcnTrace& trunk_trace, const Channels& out_adj,
                Eigen::Ref<Vector> grad, Matrix* codes_adj = nullptr) const;

 private:
  Ffcn branch_, trunk_;
  Act out_act_ = Act::identity;
  int depth_ = 0;
  int count_ = 0;
  int trunk_offset_ = 0, w_offset_ = 0, b0_offset_ = 0;
};

}  // namespace igno
