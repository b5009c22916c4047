// SPDX-License-Identifier: Apache-2.0
//
// Exact parameter gradients of scalar losses assembled from network
// outputs. Two reverse passes are provided: one over the jet-augmented
// forward (for losses that read values, input-gradients and
// input-Hessians, e.g. PDE residuals) and a cheaper value-only pass (for
// boundary / terminal / distillation mismatches). Batch sums use the
// deterministic chunked reduction, so results are independent of thread
// count.

#pragma once

#include <functional>
#include <span>

#include "kdpinn/net.hpp"

namespace kdpinn {

/// Records the jet forward pass of one point and plays it backwards.
/// Reusable across points of the same network.
class Tape {
 public:
  explicit Tape(const MlpNetwork& net);

  /// Jet forward at raw point x; keeps the per-layer jets needed by
  /// backward(). Returns the output jets (valid until the next forward).
  std::span<const Jet2> forward(std::span<const double> x);

  /// Accumulates d(sum of out_bars . output-jets)/d(params) into grad.
  /// out_bars holds the adjoint of every output-jet component.
  void backward(std::span<const Jet2> out_bars, std::span<double> grad);

 private:
  const MlpNetwork* net_;
  std::vector<std::vector<Jet2>> post_;  // post_[0] = seeded inputs
  std::vector<std::vector<Jet2>> pre_;   // pre_[l] = affine output of layer l
  std::vector<std::vector<ActDerivs>> derivs_;
  std::vector<Jet2> bar_a_, bar_b_;
};

/// Value-only counterpart (standard backprop); used for loss terms that
/// never touch derivatives of the network output.
class ValueTape {
 public:
  explicit ValueTape(const MlpNetwork& net);

  std::span<const double> forward(std::span<const double> x);
  void backward(std::span<const double> out_bars, std::span<double> grad);

 private:
  const MlpNetwork* net_;
  std::vector<std::vector<double>> post_;
  std::vector<std::vector<double>> pre_;
  std::vector<double> bar_a_, bar_b_;
};

/// Per-point loss over output jets. Fills out_bars (adjoints of every
/// output-jet component) and returns the point's contribution to the sum.
using JetPointLoss = std::function<double(std::size_t idx, const double* x,
                                          std::span<const Jet2> outs,
                                          std::span<Jet2> out_bars)>;

/// Per-point loss over output values only.
using ValuePointLoss = std::function<double(std::size_t idx, const double* x,
                                            std::span<const double> outs,
                                            std::span<double> out_bars)>;

/// Sum of point_loss over n points (row-major [n][d_in]); the gradient of
/// the sum is added into grad_acc (length = net.n_params()).
double accumulate_jet_term(const MlpNetwork& net, const double* pts,
                           std::size_t n, const JetPointLoss& point_loss,
                           std::span<double> grad_acc, bool parallel);

double accumulate_value_term(const MlpNetwork& net, const double* pts,
                             std::size_t n, const ValuePointLoss& point_loss,
                             std::span<double> grad_acc, bool parallel);

/// Convenience wrapper: loss value plus full ParamGradient of a jet-batch
/// loss in one call.
std::pair<double, ParamGradient> loss_param_gradient(
    const MlpNetwork& net, const double* pts, std::size_t n,
    const JetPointLoss& point_loss, bool parallel = false);

}  // namespace kdpinn
