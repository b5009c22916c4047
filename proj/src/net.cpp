// SPDX-License-Identifier: Apache-2.0

#include "kdpinn/net.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "kdpinn/parallel.hpp"
#include "kdpinn/rng.hpp"

namespace kdpinn {

namespace {
// Samples per block in the batched forward. Keeps both layer buffers
// within L1 for widths up to 64 and lets the inner loop vectorize over
// lanes without reassociating any sum.
constexpr std::size_t kBatchBlock = 16;
}  // namespace

void LayerSpec::validate() const {
  if (sizes.size() < 2) {
    throw std::invalid_argument("LayerSpec: need at least [d_in, d_out]");
  }
  for (int s : sizes) {
    if (s < 1) throw std::invalid_argument("LayerSpec: sizes must be >= 1");
  }
  if (sizes.front() > kMaxDim) {
    throw std::invalid_argument("LayerSpec: input dimension above 3");
  }
}

std::string LayerSpec::to_string() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) os << ",";
    os << sizes[i];
  }
  os << "] " << activation_name(hidden_activation);
  return os.str();
}

long long param_count(const LayerSpec& spec) {
  spec.validate();
  long long n = 0;
  for (std::size_t l = 1; l < spec.sizes.size(); ++l) {
    n += static_cast<long long>(spec.sizes[l - 1] + 1) * spec.sizes[l];
  }
  return n;
}

long long mac_count(const LayerSpec& spec) {
  spec.validate();
  long long n = 0;
  for (std::size_t l = 1; l < spec.sizes.size(); ++l) {
    n += static_cast<long long>(spec.sizes[l - 1]) * spec.sizes[l];
  }
  return n;
}

InputScale InputScale::identity(int dim) {
  InputScale s;
  s.dim = dim;
  for (int i = 0; i < dim; ++i) {
    s.lo[i] = -1.0;
    s.hi[i] = 1.0;
  }
  return s;
}

InputScale InputScale::from_box(int dim, std::span<const double> lo,
                                std::span<const double> hi) {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("InputScale: dimension must be in [1,3]");
  }
  InputScale s;
  s.dim = dim;
  for (int i = 0; i < dim; ++i) {
    if (!(hi[i] > lo[i])) {
      throw std::invalid_argument("InputScale: box widths must be positive");
    }
    s.lo[i] = lo[i];
    s.hi[i] = hi[i];
  }
  return s;
}

MlpNetwork::MlpNetwork(LayerSpec spec, InputScale scale)
    : spec_(std::move(spec)), scale_(scale) {
  spec_.validate();
  if (scale_.dim != spec_.input_dim()) {
    throw std::invalid_argument("MlpNetwork: scale dimension mismatch");
  }
  const int L = spec_.layer_count();
  w_offsets_.resize(L);
  b_offsets_.resize(L);
  std::size_t off = 0;
  for (int l = 0; l < L; ++l) {
    const std::size_t n_in = spec_.sizes[l];
    const std::size_t n_out = spec_.sizes[l + 1];
    w_offsets_[l] = off;
    off += n_in * n_out;
    b_offsets_[l] = off;
    off += n_out;
  }
  params_.assign(off, 0.0);
  max_width_ = *std::max_element(spec_.sizes.begin(), spec_.sizes.end());
}

MlpNetwork MlpNetwork::xavier(const LayerSpec& spec, const InputScale& scale,
                              std::uint64_t seed) {
  MlpNetwork net(spec, scale);
  net.init_seed_ = seed;
  Rng rng(seed);
  for (int l = 0; l < net.spec_.layer_count(); ++l) {
    const int n_in = net.spec_.sizes[l];
    const int n_out = net.spec_.sizes[l + 1];
    const double bound = std::sqrt(6.0 / (n_in + n_out));
    auto w = net.weights(l);
    for (double& x : w) x = rng.uniform(-bound, bound);
    // Biases stay zero.
  }
  return net;
}

std::span<const double> MlpNetwork::weights(int layer) const {
  const std::size_t n =
      static_cast<std::size_t>(spec_.sizes[layer]) * spec_.sizes[layer + 1];
  return {params_.data() + w_offsets_[layer], n};
}

std::span<const double> MlpNetwork::biases(int layer) const {
  return {params_.data() + b_offsets_[layer],
          static_cast<std::size_t>(spec_.sizes[layer + 1])};
}

std::span<double> MlpNetwork::weights(int layer) {
  const std::size_t n =
      static_cast<std::size_t>(spec_.sizes[layer]) * spec_.sizes[layer + 1];
  return {params_.data() + w_offsets_[layer], n};
}

std::span<double> MlpNetwork::biases(int layer) {
  return {params_.data() + b_offsets_[layer],
          static_cast<std::size_t>(spec_.sizes[layer + 1])};
}

namespace {

// One block of up to kBatchBlock samples, lane-major: buf[neuron][lane].
// The lane loop has no cross-lane dependency, so it vectorizes cleanly.
void forward_block(const MlpNetwork& net, const double* xs_scaled,
                   std::size_t lanes, double* out) {
  const LayerSpec& spec = net.spec();
  const int d_in = spec.input_dim();
  const int d_out = spec.output_dim();
  const int L = spec.layer_count();
  const std::size_t W = static_cast<std::size_t>(net.max_width());

  // Stack buffers cover widths up to 64; wider nets fall back to the heap.
  constexpr std::size_t kStackNeurons = 64;
  double bufA[2][kStackNeurons * kBatchBlock];
  std::vector<double> heap;
  double* cur;
  double* nxt;
  if (W <= kStackNeurons) {
    cur = bufA[0];
    nxt = bufA[1];
  } else {
    heap.resize(2 * W * kBatchBlock);
    cur = heap.data();
    nxt = heap.data() + W * kBatchBlock;
  }

  if (lanes < kBatchBlock) {
    // Partial tail block: zero the unused lanes so the full-width
    // activation sweeps never touch indeterminate values.
    std::fill(cur, cur + W * kBatchBlock, 0.0);
    std::fill(nxt, nxt + W * kBatchBlock, 0.0);
  }
  for (int i = 0; i < d_in; ++i) {
    for (std::size_t s = 0; s < lanes; ++s) {
      cur[i * kBatchBlock + s] = xs_scaled[s * d_in + i];
    }
  }

  for (int l = 0; l < L; ++l) {
    const int n_in = spec.sizes[l];
    const int n_out = spec.sizes[l + 1];
    const double* Wl = net.params().data() + net.weight_offset(l);
    const double* bl = net.params().data() + net.bias_offset(l);
    for (int j = 0; j < n_out; ++j) {
      double* row = nxt + static_cast<std::size_t>(j) * kBatchBlock;
      for (std::size_t s = 0; s < lanes; ++s) row[s] = bl[j];
      const double* wrow = Wl + static_cast<std::size_t>(j) * n_in;
      for (int k = 0; k < n_in; ++k) {
        const double w = wrow[k];
        const double* in = cur + static_cast<std::size_t>(k) * kBatchBlock;
        for (std::size_t s = 0; s < lanes; ++s) row[s] += w * in[s];
      }
    }
    // One contiguous activation sweep per layer block; the long
    // independent-element loop pipelines far better than per-row bursts.
    if (l + 1 < L) {
      const std::size_t total = static_cast<std::size_t>(n_out) * kBatchBlock;
      if (spec.hidden_activation == Activation::kTanh) {
        for (std::size_t s = 0; s < total; ++s) nxt[s] = std::tanh(nxt[s]);
      } else {
        for (std::size_t s = 0; s < total; ++s) {
          nxt[s] = nxt[s] / (1.0 + std::exp(-nxt[s]));
        }
      }
    }
    std::swap(cur, nxt);
  }

  for (int j = 0; j < d_out; ++j) {
    for (std::size_t s = 0; s < lanes; ++s) {
      out[s * d_out + j] = cur[j * kBatchBlock + s];
    }
  }
}

}  // namespace

void MlpNetwork::forward_prescaled(std::span<const double> xs, std::size_t n,
                                   std::span<double> out) const {
  const std::size_t d_in = static_cast<std::size_t>(spec_.input_dim());
  const std::size_t d_out = static_cast<std::size_t>(spec_.output_dim());
  if (xs.size() < n * d_in || out.size() < n * d_out) {
    throw std::invalid_argument("forward_prescaled: buffer shape mismatch");
  }
  for (std::size_t base = 0; base < n; base += kBatchBlock) {
    const std::size_t lanes = std::min(kBatchBlock, n - base);
    forward_block(*this, xs.data() + base * d_in, lanes,
                  out.data() + base * d_out);
  }
}

void MlpNetwork::forward(std::span<const double> xs, std::size_t n,
                         std::span<double> out, bool parallel) const {
  const std::size_t d_in = static_cast<std::size_t>(spec_.input_dim());
  const std::size_t d_out = static_cast<std::size_t>(spec_.output_dim());
  if (xs.size() < n * d_in || out.size() < n * d_out) {
    throw std::invalid_argument("forward: buffer shape mismatch");
  }
  const std::size_t n_blocks = (n + kBatchBlock - 1) / kBatchBlock;
  parallel_for(
      n_blocks,
      [&](std::size_t blk) {
        const std::size_t base = blk * kBatchBlock;
        const std::size_t lanes = std::min(kBatchBlock, n - base);
        double scaled[kBatchBlock * kMaxDim];
        for (std::size_t s = 0; s < lanes; ++s) {
          for (std::size_t i = 0; i < d_in; ++i) {
            scaled[s * d_in + i] =
                scale_.to_unit(xs[(base + s) * d_in + i], static_cast<int>(i));
          }
        }
        forward_block(*this, scaled, lanes, out.data() + base * d_out);
      },
      parallel);
}

void MlpNetwork::forward_jets(std::span<const double> x,
                              std::span<Jet2> out) const {
  const int d_in = spec_.input_dim();
  const int d_out = spec_.output_dim();
  if (static_cast<int>(x.size()) < d_in ||
      static_cast<int>(out.size()) < d_out) {
    throw std::invalid_argument("forward_jets: buffer shape mismatch");
  }
  const std::size_t W = static_cast<std::size_t>(max_width_);
  std::vector<Jet2> a(W), b(W);
  Jet2* cur = a.data();
  Jet2* nxt = b.data();

  // Seed with the scale map folded in, so downstream derivatives are with
  // respect to raw coordinates.
  for (int i = 0; i < d_in; ++i) {
    cur[i] = Jet2{};
    cur[i].v = scale_.to_unit(x[i], i);
    cur[i].g[i] = scale_.factor(i);
  }

  const int L = spec_.layer_count();
  for (int l = 0; l < L; ++l) {
    const int n_in = spec_.sizes[l];
    const int n_out = spec_.sizes[l + 1];
    jet_affine(weights(l), biases(l), {cur, static_cast<std::size_t>(n_in)},
               {nxt, static_cast<std::size_t>(n_out)});
    if (l + 1 < L) {
      for (int j = 0; j < n_out; ++j) {
        nxt[j] = jet_activation(spec_.hidden_activation, nxt[j]);
      }
    }
    std::swap(cur, nxt);
  }
  for (int j = 0; j < d_out; ++j) out[j] = cur[j];
}

}  // namespace kdpinn
