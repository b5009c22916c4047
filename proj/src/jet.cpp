// SPDX-License-Identifier: Apache-2.0

#include "kdpinn/jet.hpp"

#include <cmath>

namespace kdpinn {

void ParamGradient::recompute_norm() {
  double s = 0.0;
  for (double x : values) s += x * x;
  norm = std::sqrt(s);
}

std::vector<Jet2> seed_inputs(std::span<const double> x, int d) {
  if (d < 1 || d > kMaxDim) {
    throw std::invalid_argument("seed_inputs: dimension must be in [1,3]");
  }
  if (static_cast<int>(x.size()) < d) {
    throw std::invalid_argument("seed_inputs: point shorter than dimension");
  }
  std::vector<Jet2> jets(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    jets[static_cast<std::size_t>(i)].v = x[static_cast<std::size_t>(i)];
    jets[static_cast<std::size_t>(i)].g[static_cast<std::size_t>(i)] = 1.0;
  }
  return jets;
}

void jet_affine(std::span<const double> W, std::span<const double> b,
                std::span<const Jet2> z, std::span<Jet2> out) {
  const std::size_t n_in = z.size();
  const std::size_t n_out = out.size();
  if (W.size() != n_in * n_out || b.size() != n_out) {
    throw std::invalid_argument("jet_affine: shape mismatch");
  }
  for (std::size_t j = 0; j < n_out; ++j) {
    Jet2 acc;
    acc.v = b[j];
    const double* wrow = W.data() + j * n_in;
    for (std::size_t k = 0; k < n_in; ++k) {
      const double w = wrow[k];
      const Jet2& zk = z[k];
      acc.v += w * zk.v;
      for (int c = 0; c < kMaxDim; ++c) acc.g[c] += w * zk.g[c];
      for (int c = 0; c < kHessPacked; ++c) acc.h[c] += w * zk.h[c];
    }
    out[j] = acc;
  }
}

Jet2 jet_activation(Activation kind, const Jet2& z) {
  const ActDerivs d = activation_derivs(kind, z.v);
  Jet2 out;
  out.v = d.s0;
  for (int c = 0; c < kMaxDim; ++c) out.g[c] = d.s1 * z.g[c];
  for (int i = 0; i < kMaxDim; ++i) {
    for (int j = 0; j <= i; ++j) {
      out.h[hess_index(i, j)] =
          d.s2 * z.g[i] * z.g[j] + d.s1 * z.h[hess_index(i, j)];
    }
  }
  return out;
}

}  // namespace kdpinn
