// SPDX-License-Identifier: Apache-2.0
//
// Second-order jets: scalar values carrying gradient and Hessian with
// respect to up to three network inputs. Forward propagation through
// affine maps and elementwise activations is exact (no truncation).

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "kdpinn/activation.hpp"

namespace kdpinn {

inline constexpr int kMaxDim = 3;
inline constexpr int kHessPacked = 6;  // lower triangle of a 3x3 symmetric matrix

/// Packed index of Hessian entry (i,j), i >= j.
/// Order: (0,0) (1,0) (1,1) (2,0) (2,1) (2,2).
constexpr int hess_index(int i, int j) {
  if (i < j) {
    const int t = i;
    i = j;
    j = t;
  }
  return i * (i + 1) / 2 + j;
}

/// Value + input-gradient + input-Hessian triple. The Hessian is stored
/// symmetric-packed, so the symmetry invariant holds by construction.
/// Unused trailing slots (dim < 3) stay zero.
struct Jet2 {
  double v = 0.0;
  std::array<double, kMaxDim> g{};
  std::array<double, kHessPacked> h{};

  double hess(int i, int j) const { return h[hess_index(i, j)]; }
};

/// Flat gradient with respect to a network's parameters, in the network's
/// parameter layout, plus its cached Euclidean norm.
struct ParamGradient {
  std::vector<double> values;
  double norm = 0.0;

  void recompute_norm();
};

/// Seed jets for the input coordinates: jet i has value x[i], gradient e_i,
/// zero Hessian. Throws if d is outside [1,3] or x is shorter than d.
std::vector<Jet2> seed_inputs(std::span<const double> x, int d);

/// out[j] = sum_k W[j*n_in+k] * z[k] + b[j], combining value, gradient and
/// Hessian with the same weights. W is row-major [n_out][n_in].
void jet_affine(std::span<const double> W, std::span<const double> b,
                std::span<const Jet2> z, std::span<Jet2> out);

/// Elementwise activation via the exact second-order chain rule:
/// v' = s(v), g' = s'(v) g, H' = s''(v) g g^T + s'(v) H.
Jet2 jet_activation(Activation kind, const Jet2& z);

}  // namespace kdpinn
