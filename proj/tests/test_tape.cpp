// SPDX-License-Identifier: Apache-2.0
//
// Parameter-gradient contract: reverse passes over the jet-augmented and
// value-only forward match central finite differences coordinate-wise.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kdpinn/net.hpp"
#include "kdpinn/rng.hpp"
#include "kdpinn/tape.hpp"
#include "testutil.hpp"

using namespace kdpinn;

namespace {

std::vector<double> random_points(int dim, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> pts(n * dim);
  for (double& x : pts) x = rng.uniform(-0.8, 0.8);
  return pts;
}

}  // namespace

TEST_CASE("gradient of a constant loss is the zero vector") {
  const LayerSpec spec{{2, 5, 1}};
  const MlpNetwork net = test::random_net(spec, InputScale::identity(2), 3);
  const auto pts = random_points(2, 8, 1);
  const auto [value, grad] = loss_param_gradient(
      net, pts.data(), 8,
      [](std::size_t, const double*, std::span<const Jet2>, std::span<Jet2>) {
        return 2.5;  // no dependence on the outputs
      });
  CHECK(value == doctest::Approx(8 * 2.5));
  CHECK(grad.norm == 0.0);
  for (double g : grad.values) CHECK(g == 0.0);
}

TEST_CASE("one-layer linear least squares matches the normal-equation form") {
  // Net u(x) = w . x + b, loss = sum_i (u(x_i) - y_i)^2.
  // d/dw_k = sum 2 (u - y) x_k, d/db = sum 2 (u - y).
  const LayerSpec spec{{2, 1}};
  MlpNetwork net(spec, InputScale::identity(2));
  net.params()[0] = 0.7;
  net.params()[1] = -0.4;
  net.params()[2] = 0.2;

  const std::size_t n = 6;
  const auto pts = random_points(2, n, 2);
  std::vector<double> targets(n);
  Rng rng(5);
  for (double& y : targets) y = rng.uniform(-1.0, 1.0);

  const auto [value, grad] = loss_param_gradient(
      net, pts.data(), n,
      [&](std::size_t i, const double*, std::span<const Jet2> outs,
          std::span<Jet2> bars) {
        const double r = outs[0].v - targets[i];
        bars[0].v = 2.0 * r;
        return r * r;
      });

  double gw0 = 0.0, gw1 = 0.0, gb = 0.0, expect_loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = 0.7 * pts[2 * i] - 0.4 * pts[2 * i + 1] + 0.2;
    const double r = u - targets[i];
    expect_loss += r * r;
    gw0 += 2.0 * r * pts[2 * i];
    gw1 += 2.0 * r * pts[2 * i + 1];
    gb += 2.0 * r;
  }
  CHECK(value == doctest::Approx(expect_loss).epsilon(1e-12));
  CHECK(grad.values[0] == doctest::Approx(gw0).epsilon(1e-12));
  CHECK(grad.values[1] == doctest::Approx(gw1).epsilon(1e-12));
  CHECK(grad.values[2] == doctest::Approx(gb).epsilon(1e-12));
}

TEST_CASE("jet-loss parameter gradient matches finite differences") {
  // A synthetic residual-style loss touching value, gradient and Hessian
  // components, checked on tanh and SiLU nets up to [3,8,8,3].
  struct Case {
    LayerSpec spec;
    std::uint64_t seed;
  };
  const Case cases[] = {
      {{{2, 5, 5, 1}, Activation::kTanh}, 11},
      {{{3, 8, 8, 3}, Activation::kTanh}, 12},
      {{{2, 6, 4, 2}, Activation::kSilu}, 13},
      {{{3, 8, 8, 3}, Activation::kSilu}, 14},
  };
  for (const Case& c : cases) {
    const int d = c.spec.input_dim();
    const int m = c.spec.output_dim();
    MlpNetwork net = test::random_net(c.spec, InputScale::identity(d), c.seed);
    const std::size_t n = 8;
    const auto pts = random_points(d, n, c.seed + 100);

    const JetPointLoss point_loss =
        [&](std::size_t, const double* x, std::span<const Jet2> outs,
            std::span<Jet2> bars) {
          double loss = 0.0;
          for (int j = 0; j < m; ++j) {
            // r = u_t-like + u * u_x-like - 0.3 * u_xx-like + x0 * u
            const double r = outs[j].g[d - 1] + outs[j].v * outs[j].g[0] -
                             0.3 * outs[j].h[0] + x[0] * outs[j].v;
            loss += r * r;
            bars[j].g[d - 1] += 2 * r;
            bars[j].v += 2 * r * (outs[j].g[0] + x[0]);
            bars[j].g[0] += 2 * r * outs[j].v;
            bars[j].h[0] += 2 * r * -0.3;
          }
          return loss;
        };

    auto [value, grad] = loss_param_gradient(net, pts.data(), n, point_loss);
    CHECK(std::isfinite(value));

    auto loss_fn = [&]() {
      double total = 0.0;
      std::vector<Jet2> outs(m), bars(m);
      for (std::size_t i = 0; i < n; ++i) {
        net.forward_jets({pts.data() + i * d, static_cast<std::size_t>(d)},
                         outs);
        total += point_loss(i, pts.data() + i * d, outs, bars);
      }
      return total;
    };

    double worst = 0.0;
    for (std::size_t k = 0; k < net.params().size(); ++k) {
      const double fd = test::fd_param(loss_fn, net, k);
      worst = std::max(worst, test::rel_err(grad.values[k], fd));
    }
    CAPTURE(c.spec.to_string());
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("value tape gradient matches finite differences") {
  const LayerSpec spec{{2, 7, 7, 2}, Activation::kSilu};
  MlpNetwork net = test::random_net(spec, InputScale::identity(2), 31);
  const std::size_t n = 10;
  const auto pts = random_points(2, n, 32);
  std::vector<double> targets(2 * n);
  Rng rng(33);
  for (double& y : targets) y = rng.uniform(-0.5, 0.5);

  const ValuePointLoss point_loss = [&](std::size_t i, const double*,
                                        std::span<const double> outs,
                                        std::span<double> bars) {
    double loss = 0.0;
    for (int j = 0; j < 2; ++j) {
      const double r = outs[j] - targets[2 * i + j];
      loss += r * r;
      bars[j] = 2 * r;
    }
    return loss;
  };

  std::vector<double> grad(net.params().size(), 0.0);
  const double value =
      accumulate_value_term(net, pts.data(), n, point_loss, grad, false);
  CHECK(std::isfinite(value));

  auto loss_fn = [&]() {
    double total = 0.0;
    std::vector<double> out(2);
    std::vector<double> bars(2);
    for (std::size_t i = 0; i < n; ++i) {
      net.forward({pts.data() + i * 2, 2}, 1, out);
      total += point_loss(i, pts.data() + i * 2, out, bars);
    }
    return total;
  };
  double worst = 0.0;
  for (std::size_t k = 0; k < net.params().size(); ++k) {
    worst = std::max(worst,
                     test::rel_err(grad[k], test::fd_param(loss_fn, net, k)));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("value tape and jet tape agree on value-only losses") {
  const LayerSpec spec{{2, 6, 6, 1}};
  MlpNetwork net = test::random_net(spec, InputScale::identity(2), 55);
  const std::size_t n = 12;
  const auto pts = random_points(2, n, 56);

  std::vector<double> grad_value(net.params().size(), 0.0);
  accumulate_value_term(
      net, pts.data(), n,
      [](std::size_t, const double*, std::span<const double> outs,
         std::span<double> bars) {
        bars[0] = 2 * outs[0];
        return outs[0] * outs[0];
      },
      grad_value, false);

  std::vector<double> grad_jet(net.params().size(), 0.0);
  accumulate_jet_term(
      net, pts.data(), n,
      [](std::size_t, const double*, std::span<const Jet2> outs,
         std::span<Jet2> bars) {
        bars[0].v = 2 * outs[0].v;
        return outs[0].v * outs[0].v;
      },
      grad_jet, false);

  for (std::size_t k = 0; k < grad_value.size(); ++k) {
    CHECK(grad_value[k] == doctest::Approx(grad_jet[k]).epsilon(1e-12));
  }
}
