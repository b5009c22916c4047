// SPDX-License-Identifier: Apache-2.0
//
// Fully-connected network: layer spec, Xavier initialization, plain and
// jet-augmented forward passes, and parameter/MAC counting. Parameters
// live in one flat vector ([W1 | b1 | W2 | b2 | ...], weights row-major),
// which the optimizer and the reverse pass share.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kdpinn/jet.hpp"

namespace kdpinn {

struct LayerSpec {
  std::vector<int> sizes;  // [d_in, h_1, ..., h_L, d_out]
  Activation hidden_activation = Activation::kTanh;
  // Output layer is always linear.

  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }
  int layer_count() const { return static_cast<int>(sizes.size()) - 1; }
  void validate() const;
  std::string to_string() const;  // e.g. "[2,50,50,50,1] tanh"
};

/// Total trainable parameters: sum over layers of (d_{l-1} + 1) * d_l.
long long param_count(const LayerSpec& spec);

/// Multiply-accumulates per sample: sum over layers of d_{l-1} * d_l.
long long mac_count(const LayerSpec& spec);

/// Affine map taking the physical domain box to [-1,1] per coordinate.
struct InputScale {
  int dim = 0;
  std::array<double, kMaxDim> lo{};
  std::array<double, kMaxDim> hi{};

  static InputScale identity(int dim);
  static InputScale from_box(int dim, std::span<const double> lo,
                             std::span<const double> hi);

  double to_unit(double x, int i) const { return (x - lo[i]) / (hi[i] - lo[i]) * 2.0 - 1.0; }
  double from_unit(double u, int i) const { return lo[i] + (u + 1.0) * 0.5 * (hi[i] - lo[i]); }
  /// d(scaled)/d(raw) for coordinate i; constant because the map is affine.
  double factor(int i) const { return 2.0 / (hi[i] - lo[i]); }
};

class MlpNetwork {
 public:
  MlpNetwork(LayerSpec spec, InputScale scale);

  /// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
  /// Deterministic for a fixed seed.
  static MlpNetwork xavier(const LayerSpec& spec, const InputScale& scale,
                           std::uint64_t seed);

  const LayerSpec& spec() const { return spec_; }
  const InputScale& scale() const { return scale_; }
  std::uint64_t init_seed() const { return init_seed_; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  long long n_params() const { return static_cast<long long>(params_.size()); }

  std::span<const double> weights(int layer) const;
  std::span<const double> biases(int layer) const;
  std::span<double> weights(int layer);
  std::span<double> biases(int layer);
  std::size_t weight_offset(int layer) const { return w_offsets_[layer]; }
  std::size_t bias_offset(int layer) const { return b_offsets_[layer]; }

  /// Plain value forward on raw domain coordinates (scaling applied
  /// internally). xs is row-major [n][d_in], out is [n][d_out].
  void forward(std::span<const double> xs, std::size_t n,
               std::span<double> out, bool parallel = false) const;

  /// Same but on inputs already mapped to [-1,1]; this is the path the
  /// latency harness times.
  void forward_prescaled(std::span<const double> xs, std::size_t n,
                         std::span<double> out) const;

  /// Jet forward at one raw point: one jet per output channel, with the
  /// scale chain-rule factors folded in so derivatives are with respect
  /// to raw coordinates.
  void forward_jets(std::span<const double> x, std::span<Jet2> out) const;

  int max_width() const { return max_width_; }

 private:
  LayerSpec spec_;
  InputScale scale_;
  std::vector<double> params_;
  std::vector<std::size_t> w_offsets_, b_offsets_;
  int max_width_ = 0;
  std::uint64_t init_seed_ = 0;

  friend class Tape;
  friend class ValueTape;
};

}  // namespace kdpinn
