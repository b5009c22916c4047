// SPDX-License-Identifier: Apache-2.0

#include "kdpinn/tape.hpp"

#include <stdexcept>

#include "kdpinn/parallel.hpp"

namespace kdpinn {

Tape::Tape(const MlpNetwork& net) : net_(&net) {
  const LayerSpec& spec = net.spec();
  const int L = spec.layer_count();
  post_.resize(L + 1);
  pre_.resize(L);
  derivs_.resize(L);
  post_[0].resize(spec.input_dim());
  for (int l = 0; l < L; ++l) {
    pre_[l].resize(spec.sizes[l + 1]);
    post_[l + 1].resize(spec.sizes[l + 1]);
    derivs_[l].resize(spec.sizes[l + 1]);
  }
  bar_a_.resize(net.max_width());
  bar_b_.resize(net.max_width());
}

std::span<const Jet2> Tape::forward(std::span<const double> x) {
  const LayerSpec& spec = net_->spec();
  const InputScale& scale = net_->scale();
  const int d_in = spec.input_dim();
  const int L = spec.layer_count();

  for (int i = 0; i < d_in; ++i) {
    Jet2 seed;
    seed.v = scale.to_unit(x[i], i);
    seed.g[i] = scale.factor(i);
    post_[0][i] = seed;
  }
  for (int l = 0; l < L; ++l) {
    jet_affine(net_->weights(l), net_->biases(l), post_[l], pre_[l]);
    const bool last = (l + 1 == L);
    const int n_out = spec.sizes[l + 1];
    for (int j = 0; j < n_out; ++j) {
      if (last) {
        post_[l + 1][j] = pre_[l][j];
      } else {
        const Jet2& a = pre_[l][j];
        const ActDerivs d = activation_derivs(spec.hidden_activation, a.v);
        derivs_[l][j] = d;
        Jet2 z;
        z.v = d.s0;
        for (int c = 0; c < kMaxDim; ++c) z.g[c] = d.s1 * a.g[c];
        for (int i = 0; i < kMaxDim; ++i) {
          for (int k = 0; k <= i; ++k) {
            z.h[hess_index(i, k)] =
                d.s2 * a.g[i] * a.g[k] + d.s1 * a.h[hess_index(i, k)];
          }
        }
        post_[l + 1][j] = z;
      }
    }
  }
  return post_[L];
}

void Tape::backward(std::span<const Jet2> out_bars, std::span<double> grad) {
  const LayerSpec& spec = net_->spec();
  const int L = spec.layer_count();
  if (grad.size() != net_->params().size()) {
    throw std::invalid_argument("Tape::backward: gradient size mismatch");
  }

  // bar_a_ holds the post-activation adjoint of the current layer.
  Jet2* zbar = bar_a_.data();
  Jet2* prev = bar_b_.data();
  for (int j = 0; j < spec.output_dim(); ++j) zbar[j] = out_bars[j];

  for (int l = L - 1; l >= 0; --l) {
    const int n_in = spec.sizes[l];
    const int n_out = spec.sizes[l + 1];
    const bool last = (l + 1 == L);

    // Map the post-activation adjoint to the pre-activation adjoint.
    // The output layer is linear, so the adjoint passes through.
    if (!last) {
      for (int j = 0; j < n_out; ++j) {
        const Jet2& a = pre_[l][j];
        const ActDerivs& d = derivs_[l][j];
        const Jet2 zb = zbar[j];
        Jet2 ab;
        double av = d.s1 * zb.v;
        for (int c = 0; c < kMaxDim; ++c) {
          av += d.s2 * zb.g[c] * a.g[c];
          ab.g[c] = d.s1 * zb.g[c];
        }
        for (int i = 0; i < kMaxDim; ++i) {
          for (int k = 0; k <= i; ++k) {
            const double hb = zb.h[hess_index(i, k)];
            av += hb * (d.s3 * a.g[i] * a.g[k] + d.s2 * a.h[hess_index(i, k)]);
            const double t = d.s2 * hb;
            ab.g[i] += t * a.g[k];
            ab.g[k] += t * a.g[i];
            ab.h[hess_index(i, k)] = d.s1 * hb;
          }
        }
        ab.v = av;
        zbar[j] = ab;
      }
    }

    // Affine adjoint: parameter contributions plus input adjoint.
    double* Wg = grad.data() + net_->weight_offset(l);
    double* bg = grad.data() + net_->bias_offset(l);
    const std::span<const double> W = net_->weights(l);
    const std::vector<Jet2>& zin = post_[l];
    for (int k = 0; k < n_in; ++k) prev[k] = Jet2{};
    for (int j = 0; j < n_out; ++j) {
      const Jet2& ab = zbar[j];
      bg[j] += ab.v;
      double* wrow = Wg + static_cast<std::size_t>(j) * n_in;
      const double* Wrow = W.data() + static_cast<std::size_t>(j) * n_in;
      for (int k = 0; k < n_in; ++k) {
        const Jet2& zk = zin[k];
        double dot = ab.v * zk.v;
        for (int c = 0; c < kMaxDim; ++c) dot += ab.g[c] * zk.g[c];
        for (int c = 0; c < kHessPacked; ++c) dot += ab.h[c] * zk.h[c];
        wrow[k] += dot;
        if (l > 0) {
          Jet2& pk = prev[k];
          const double w = Wrow[k];
          pk.v += w * ab.v;
          for (int c = 0; c < kMaxDim; ++c) pk.g[c] += w * ab.g[c];
          for (int c = 0; c < kHessPacked; ++c) pk.h[c] += w * ab.h[c];
        }
      }
    }
    std::swap(zbar, prev);
  }
}

ValueTape::ValueTape(const MlpNetwork& net) : net_(&net) {
  const LayerSpec& spec = net.spec();
  const int L = spec.layer_count();
  post_.resize(L + 1);
  pre_.resize(L);
  post_[0].resize(spec.input_dim());
  for (int l = 0; l < L; ++l) {
    pre_[l].resize(spec.sizes[l + 1]);
    post_[l + 1].resize(spec.sizes[l + 1]);
  }
  bar_a_.resize(net.max_width());
  bar_b_.resize(net.max_width());
}

std::span<const double> ValueTape::forward(std::span<const double> x) {
  const LayerSpec& spec = net_->spec();
  const int d_in = spec.input_dim();
  const int L = spec.layer_count();
  for (int i = 0; i < d_in; ++i) post_[0][i] = net_->scale().to_unit(x[i], i);
  for (int l = 0; l < L; ++l) {
    const int n_in = spec.sizes[l];
    const int n_out = spec.sizes[l + 1];
    const double* Wl = net_->params().data() + net_->weight_offset(l);
    const double* bl = net_->params().data() + net_->bias_offset(l);
    const bool last = (l + 1 == L);
    for (int j = 0; j < n_out; ++j) {
      double acc = bl[j];
      const double* wrow = Wl + static_cast<std::size_t>(j) * n_in;
      for (int k = 0; k < n_in; ++k) acc += wrow[k] * post_[l][k];
      pre_[l][j] = acc;
      post_[l + 1][j] =
          last ? acc : activation_value(spec.hidden_activation, acc);
    }
  }
  return post_[L];
}

void ValueTape::backward(std::span<const double> out_bars,
                         std::span<double> grad) {
  const LayerSpec& spec = net_->spec();
  const int L = spec.layer_count();
  if (grad.size() != net_->params().size()) {
    throw std::invalid_argument("ValueTape::backward: gradient size mismatch");
  }
  double* delta = bar_a_.data();
  double* prev = bar_b_.data();
  for (int j = 0; j < spec.output_dim(); ++j) delta[j] = out_bars[j];

  for (int l = L - 1; l >= 0; --l) {
    const int n_in = spec.sizes[l];
    const int n_out = spec.sizes[l + 1];
    if (l + 1 != L) {
      for (int j = 0; j < n_out; ++j) {
        delta[j] *= activation_derivs(spec.hidden_activation, pre_[l][j]).s1;
      }
    }
    double* Wg = grad.data() + net_->weight_offset(l);
    double* bg = grad.data() + net_->bias_offset(l);
    const double* W = net_->params().data() + net_->weight_offset(l);
    for (int k = 0; k < n_in; ++k) prev[k] = 0.0;
    for (int j = 0; j < n_out; ++j) {
      const double d = delta[j];
      bg[j] += d;
      double* wrow = Wg + static_cast<std::size_t>(j) * n_in;
      const double* Wrow = W + static_cast<std::size_t>(j) * n_in;
      for (int k = 0; k < n_in; ++k) {
        wrow[k] += d * post_[l][k];
        if (l > 0) prev[k] += Wrow[k] * d;
      }
    }
    std::swap(delta, prev);
  }
}

namespace {

struct TermPartial {
  double loss = 0.0;
  std::vector<double> grad;
};

}  // namespace

double accumulate_jet_term(const MlpNetwork& net, const double* pts,
                           std::size_t n, const JetPointLoss& point_loss,
                           std::span<double> grad_acc, bool parallel) {
  const std::size_t d_in = static_cast<std::size_t>(net.spec().input_dim());
  const std::size_t d_out = static_cast<std::size_t>(net.spec().output_dim());
  const std::size_t n_params = net.params().size();
  if (grad_acc.size() != n_params) {
    throw std::invalid_argument("accumulate_jet_term: gradient size mismatch");
  }
  TermPartial total;
  total.grad.assign(n_params, 0.0);
  chunked_reduce<TermPartial>(
      n,
      [&](std::size_t begin, std::size_t end, TermPartial& p) {
        p.grad.assign(n_params, 0.0);
        Tape tape(net);
        std::vector<Jet2> bars(d_out);
        for (std::size_t i = begin; i < end; ++i) {
          const double* x = pts + i * d_in;
          const std::span<const Jet2> outs = tape.forward({x, d_in});
          for (Jet2& b : bars) b = Jet2{};
          p.loss += point_loss(i, x, outs, bars);
          tape.backward(bars, p.grad);
        }
      },
      total,
      [&](TermPartial& acc, const TermPartial& p) {
        acc.loss += p.loss;
        for (std::size_t k = 0; k < n_params; ++k) acc.grad[k] += p.grad[k];
      },
      parallel);
  for (std::size_t k = 0; k < n_params; ++k) grad_acc[k] += total.grad[k];
  return total.loss;
}

double accumulate_value_term(const MlpNetwork& net, const double* pts,
                             std::size_t n, const ValuePointLoss& point_loss,
                             std::span<double> grad_acc, bool parallel) {
  const std::size_t d_in = static_cast<std::size_t>(net.spec().input_dim());
  const std::size_t d_out = static_cast<std::size_t>(net.spec().output_dim());
  const std::size_t n_params = net.params().size();
  if (grad_acc.size() != n_params) {
    throw std::invalid_argument(
        "accumulate_value_term: gradient size mismatch");
  }
  TermPartial total;
  total.grad.assign(n_params, 0.0);
  chunked_reduce<TermPartial>(
      n,
      [&](std::size_t begin, std::size_t end, TermPartial& p) {
        p.grad.assign(n_params, 0.0);
        ValueTape tape(net);
        std::vector<double> bars(d_out);
        for (std::size_t i = begin; i < end; ++i) {
          const double* x = pts + i * d_in;
          const std::span<const double> outs = tape.forward({x, d_in});
          for (double& b : bars) b = 0.0;
          p.loss += point_loss(i, x, outs, bars);
          tape.backward(bars, p.grad);
        }
      },
      total,
      [&](TermPartial& acc, const TermPartial& p) {
        acc.loss += p.loss;
        for (std::size_t k = 0; k < n_params; ++k) acc.grad[k] += p.grad[k];
      },
      parallel);
  for (std::size_t k = 0; k < n_params; ++k) grad_acc[k] += total.grad[k];
  return total.loss;
}

std::pair<double, ParamGradient> loss_param_gradient(
    const MlpNetwork& net, const double* pts, std::size_t n,
    const JetPointLoss& point_loss, bool parallel) {
  ParamGradient g;
  g.values.assign(net.params().size(), 0.0);
  const double loss =
      accumulate_jet_term(net, pts, n, point_loss, g.values, parallel);
  g.recompute_norm();
  return {loss, std::move(g)};
}

}  // namespace kdpinn
