// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kdpinn/jet.hpp"
#include "kdpinn/net.hpp"
#include "kdpinn/tape.hpp"
#include "testutil.hpp"

using namespace kdpinn;

TEST_CASE("seed jets carry unit gradients and zero Hessians") {
  const std::vector<double> x{0.7, 0.3};
  const auto jets = seed_inputs(x, 2);
  CHECK(jets.size() == 2);
  CHECK(jets[0].v == 0.7);
  CHECK(jets[0].g[0] == 1.0);
  CHECK(jets[0].g[1] == 0.0);
  CHECK(jets[1].v == 0.3);
  CHECK(jets[1].g[1] == 1.0);
  for (int c = 0; c < kHessPacked; ++c) {
    CHECK(jets[0].h[c] == 0.0);
    CHECK(jets[1].h[c] == 0.0);
  }

  const std::vector<double> one{std::acos(-1.0) / 2};
  const auto j1 = seed_inputs(one, 1);
  CHECK(j1[0].v == doctest::Approx(std::acos(-1.0) / 2));
  CHECK(j1[0].g[0] == 1.0);

  const std::vector<double> three{1.0, 2.0, 3.0};
  const auto j3 = seed_inputs(three, 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(j3[i].v == three[i]);
    for (int k = 0; k < 3; ++k) CHECK(j3[i].g[k] == (i == k ? 1.0 : 0.0));
  }

  CHECK_THROWS_AS(seed_inputs(x, 0), std::invalid_argument);
  CHECK_THROWS_AS(seed_inputs(x, 4), std::invalid_argument);
}

TEST_CASE("jet_affine identity and linear maps") {
  const std::vector<double> x{3.0};
  auto z = seed_inputs(x, 1);

  // W = I, b = 0 is the identity on jets.
  std::vector<Jet2> out(1);
  const std::vector<double> eye{1.0};
  const std::vector<double> zero{0.0};
  jet_affine(eye, zero, z, out);
  CHECK(out[0].v == 3.0);
  CHECK(out[0].g[0] == 1.0);
  CHECK(out[0].h[0] == 0.0);

  // W = [[2]], b = [1]: value 7, gradient 2, zero Hessian.
  const std::vector<double> w2{2.0};
  const std::vector<double> b1{1.0};
  jet_affine(w2, b1, z, out);
  CHECK(out[0].v == 7.0);
  CHECK(out[0].g[0] == 2.0);
  CHECK(out[0].h[0] == 0.0);

  CHECK_THROWS_AS(jet_affine(w2, zero, z, {out.data(), 2}),
                  std::invalid_argument);
}

TEST_CASE("jet_affine matches finite differences of the affine map") {
  // Random 2x2 affine map of (x0, x1): grad/hess against FD oracle.
  const std::vector<double> W{0.37, -1.21, 0.64, 2.05};
  const std::vector<double> b{0.11, -0.72};
  auto apply = [&](const std::vector<double>& x, int out_idx) {
    return W[out_idx * 2] * x[0] + W[out_idx * 2 + 1] * x[1] + b[out_idx];
  };
  const std::vector<double> x{0.4, -0.9};
  const auto z = seed_inputs(x, 2);
  std::vector<Jet2> out(2);
  jet_affine(W, b, z, out);
  for (int j = 0; j < 2; ++j) {
    auto fj = [&](const std::vector<double>& p) { return apply(p, j); };
    CHECK(out[j].v == doctest::Approx(apply(x, j)));
    for (int i = 0; i < 2; ++i) {
      CHECK(test::rel_err(out[j].g[i], test::fd1(fj, x, i)) < 1e-8);
      for (int k = 0; k <= i; ++k) {
        // The map is affine, so a wide step costs no truncation error and
        // keeps the roundoff amplification of the second difference low.
        CHECK(test::rel_err(out[j].hess(i, k),
                            test::fd2(fj, x, i, k, 1e-2)) < 1e-8);
      }
    }
  }
}

TEST_CASE("jet_activation chain rule at special points") {
  // tanh at 0: gradient and Hessian pass through.
  Jet2 z;
  z.v = 0.0;
  z.g = {0.3, -0.5, 0.0};
  z.h[hess_index(0, 0)] = 0.7;
  z.h[hess_index(1, 0)] = -0.2;
  const Jet2 t0 = jet_activation(Activation::kTanh, z);
  CHECK(t0.v == 0.0);
  CHECK(t0.g[0] == doctest::Approx(0.3));
  CHECK(t0.g[1] == doctest::Approx(-0.5));
  CHECK(t0.h[hess_index(0, 0)] == doctest::Approx(0.7));
  CHECK(t0.h[hess_index(1, 0)] == doctest::Approx(-0.2));

  // SiLU at 0: value 0, derivative 1/2.
  const Jet2 s0 = jet_activation(Activation::kSilu, z);
  CHECK(s0.v == 0.0);
  CHECK(s0.g[0] == doctest::Approx(0.5 * 0.3));
}

TEST_CASE("silu derivatives match the logistic identities") {
  // SiLU'(z) = s(z) (1 + z (1 - s(z))) with s the logistic function.
  for (double v : {-1.7, -0.3, 0.0, 0.9, 2.4}) {
    const double s = 1.0 / (1.0 + std::exp(-v));
    const ActDerivs d = activation_derivs(Activation::kSilu, v);
    CHECK(d.s0 == doctest::Approx(v * s).epsilon(1e-12));
    CHECK(d.s1 == doctest::Approx(s * (1.0 + v * (1.0 - s))).epsilon(1e-12));
    // Cross-check s2, s3 against finite differences of s1 and s2.
    auto d1 = [](const std::vector<double>& x) {
      return activation_derivs(Activation::kSilu, x[0]).s1;
    };
    auto d2 = [](const std::vector<double>& x) {
      return activation_derivs(Activation::kSilu, x[0]).s2;
    };
    CHECK(test::rel_err(d.s2, test::fd1(d1, {v}, 0)) < 1e-7);
    CHECK(test::rel_err(d.s3, test::fd1(d2, {v}, 0)) < 1e-7);
  }
}

TEST_CASE("tanh second derivative matches central differences on a seed") {
  // u(x) = tanh(x) at x = 0.5 through the jet pipeline.
  const std::vector<double> x{0.5};
  const auto z = seed_inputs(x, 1);
  const Jet2 out = jet_activation(Activation::kTanh, z[0]);
  auto f = [](const std::vector<double>& p) { return std::tanh(p[0]); };
  CHECK(test::rel_err(out.g[0], test::fd1(f, x, 0)) < 1e-8);
  CHECK(test::rel_err(out.h[0], test::fd2(f, x, 0, 0)) < 1e-6);
}

TEST_CASE("composed jet pipelines are second-order exact") {
  // Random tanh nets of each input dimension, gradient and Hessian of
  // every output against finite differences of forward().
  for (int d = 1; d <= 3; ++d) {
    const LayerSpec spec{{d, 6, 5, 2}, Activation::kTanh};
    const InputScale scale = InputScale::identity(d);
    const MlpNetwork net = test::random_net(spec, scale, 17u + d);
    std::vector<double> x(d);
    for (int i = 0; i < d; ++i) x[i] = 0.1 + 0.2 * i;

    std::vector<Jet2> jets(2);
    net.forward_jets(x, jets);
    for (int out_idx = 0; out_idx < 2; ++out_idx) {
      auto f = [&](const std::vector<double>& p) {
        std::vector<double> y(2);
        net.forward(p, 1, y);
        return y[out_idx];
      };
      for (int i = 0; i < d; ++i) {
        CHECK(test::rel_err(jets[out_idx].g[i], test::fd1(f, x, i)) < 1e-6);
        for (int j = 0; j <= i; ++j) {
          CHECK(test::rel_err(jets[out_idx].hess(i, j),
                              test::fd2(f, x, i, j)) < 1e-5);
        }
      }
    }
  }
}

TEST_CASE("jet Hessians stay symmetric by construction") {
  const LayerSpec spec{{3, 8, 8, 3}, Activation::kSilu};
  const MlpNetwork net = test::random_net(spec, InputScale::identity(3), 99);
  std::vector<Jet2> jets(3);
  net.forward_jets(std::vector<double>{0.2, -0.4, 0.6}, jets);
  for (const Jet2& j : jets) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        CHECK(j.hess(a, b) == j.hess(b, a));
      }
    }
  }
}

TEST_CASE("jet_affine is exactly linear in the input jets") {
  const std::vector<double> W{1.5, -2.0, 0.25, 3.0};
  const std::vector<double> b{0.0, 0.0};
  auto mk = [](double v, double g0, double g1, double h00) {
    Jet2 j;
    j.v = v;
    j.g = {g0, g1, 0.0};
    j.h[0] = h00;
    return j;
  };
  const std::vector<Jet2> z1{mk(0.3, 1.0, 0.0, 0.4), mk(-0.8, 0.0, 1.0, 0.9)};
  const std::vector<Jet2> z2{mk(1.1, 0.5, 0.2, -0.3), mk(0.6, 0.7, 0.1, 0.2)};
  const double a = 2.5, c = -1.25;

  std::vector<Jet2> combined(2), o1(2), o2(2);
  std::vector<Jet2> zc(2);
  for (int k = 0; k < 2; ++k) {
    zc[k].v = a * z1[k].v + c * z2[k].v;
    for (int i = 0; i < kMaxDim; ++i) zc[k].g[i] = a * z1[k].g[i] + c * z2[k].g[i];
    for (int i = 0; i < kHessPacked; ++i) {
      zc[k].h[i] = a * z1[k].h[i] + c * z2[k].h[i];
    }
  }
  jet_affine(W, b, zc, combined);
  jet_affine(W, b, z1, o1);
  jet_affine(W, b, z2, o2);
  for (int k = 0; k < 2; ++k) {
    CHECK(combined[k].v ==
          doctest::Approx(a * o1[k].v + c * o2[k].v).epsilon(1e-15));
    for (int i = 0; i < kMaxDim; ++i) {
      CHECK(combined[k].g[i] ==
            doctest::Approx(a * o1[k].g[i] + c * o2[k].g[i]).epsilon(1e-15));
    }
  }

  // Identical operand order reproduces bitwise.
  std::vector<Jet2> again(2);
  jet_affine(W, b, z1, again);
  for (int k = 0; k < 2; ++k) {
    CHECK(again[k].v == o1[k].v);
    for (int i = 0; i < kHessPacked; ++i) CHECK(again[k].h[i] == o1[k].h[i]);
  }
}
