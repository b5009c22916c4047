// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kdpinn/net.hpp"
#include "kdpinn/rng.hpp"
#include "testutil.hpp"

using namespace kdpinn;

TEST_CASE("parameter and MAC counts") {
  CHECK(param_count(LayerSpec{{2, 50, 50, 50, 1}}) == 5301);
  CHECK(param_count(LayerSpec{{2, 20, 20, 20, 1}}) == 921);
  CHECK(param_count(LayerSpec{{1, 1}}) == 2);

  CHECK(mac_count(LayerSpec{{2, 50, 50, 50, 1}}) == 5150);
  CHECK(mac_count(LayerSpec{{2, 20, 20, 20, 1}}) == 860);

  const double ratio = 5150.0 / 860.0;
  CHECK(ratio == doctest::Approx(5.988).epsilon(1e-3));
}

TEST_CASE("xavier initialization bounds, determinism, moments") {
  const LayerSpec spec{{2, 50, 50, 50, 1}};
  const InputScale scale = InputScale::identity(2);
  const MlpNetwork a = MlpNetwork::xavier(spec, scale, 1234);
  const MlpNetwork b = MlpNetwork::xavier(spec, scale, 1234);
  const MlpNetwork c = MlpNetwork::xavier(spec, scale, 4321);

  const double bound0 = std::sqrt(6.0 / (2 + 50));
  for (double w : a.weights(0)) CHECK(std::abs(w) <= bound0);
  const double bound1 = std::sqrt(6.0 / 100.0);
  for (double w : a.weights(1)) CHECK(std::abs(w) <= bound1);
  for (double bias : a.biases(0)) CHECK(bias == 0.0);

  // Same seed twice gives identical parameter vectors.
  for (std::size_t i = 0; i < a.params().size(); ++i) {
    CHECK(a.params()[i] == b.params()[i]);
  }
  bool any_diff = false;
  for (std::size_t i = 0; i < a.params().size(); ++i) {
    if (a.params()[i] != c.params()[i]) any_diff = true;
  }
  CHECK(any_diff);

  // Uniform(-b, b) sample mean over 10^4 draws: within 3 sigma of zero,
  // sigma = b / sqrt(3 n).
  const LayerSpec wide{{2, 5000, 1}};
  const MlpNetwork big = MlpNetwork::xavier(wide, scale, 7);
  double mean = 0.0;
  const auto w0 = big.weights(0);
  for (double w : w0) mean += w;
  mean /= static_cast<double>(w0.size());
  const double bound = std::sqrt(6.0 / 5002.0);
  const double sigma = bound / std::sqrt(3.0 * static_cast<double>(w0.size()));
  CHECK(std::abs(mean) < 3.0 * sigma);
}

TEST_CASE("forward equals final bias for a zero network") {
  const LayerSpec spec{{2, 4, 3}};
  MlpNetwork net(spec, InputScale::identity(2));
  auto b_out = net.biases(1);
  b_out[0] = 0.5;
  b_out[1] = -1.5;
  b_out[2] = 2.0;
  std::vector<double> out(3 * 5);
  const std::vector<double> xs{0.1, 0.2,  -0.7, 0.9, 0.0,
                               0.0, 0.3,  -0.3, 1.0, -1.0};
  net.forward(xs, 5, out);
  for (int i = 0; i < 5; ++i) {
    // tanh(0) = 0 in the hidden layer, so only the output bias survives.
    CHECK(out[i * 3 + 0] == 0.5);
    CHECK(out[i * 3 + 1] == -1.5);
    CHECK(out[i * 3 + 2] == 2.0);
  }
}

TEST_CASE("batch element equals single evaluation exactly") {
  const LayerSpec spec{{2, 20, 20, 20, 1}};
  const MlpNetwork net = test::random_net(spec, InputScale::identity(2), 5);
  Rng rng(11);
  const std::size_t n = 2000;
  std::vector<double> xs(n * 2);
  for (double& x : xs) x = rng.uniform(-1.0, 1.0);
  std::vector<double> big(n);
  net.forward(xs, n, big);

  for (std::size_t i : {std::size_t(0), std::size_t(17), std::size_t(1999)}) {
    std::vector<double> one(1);
    net.forward({xs.data() + 2 * i, 2}, 1, one);
    CHECK(one[0] == big[i]);
  }
}

TEST_CASE("forward and forward_jets agree on values") {
  const LayerSpec spec{{2, 20, 20, 20, 1}};
  const InputScale scale = InputScale::from_box(
      2, std::vector<double>{0.5, 0.0}, std::vector<double>{1.5, 1.0});
  const MlpNetwork net = test::random_net(spec, scale, 42);

  // Spot value at (S,t) = (1.0, 0.5).
  std::vector<double> v(1);
  net.forward(std::vector<double>{1.0, 0.5}, 1, v);
  std::vector<Jet2> jets(1);
  net.forward_jets(std::vector<double>{1.0, 0.5}, jets);
  CHECK(std::abs(v[0] - jets[0].v) < 1e-14);

  // 1000 random points.
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> x{rng.uniform(0.5, 1.5), rng.uniform(0.0, 1.0)};
    net.forward(x, 1, v);
    net.forward_jets(x, jets);
    CHECK(std::abs(v[0] - jets[0].v) < 1e-14);
  }
}

TEST_CASE("input scale round trip and chain rule factors") {
  const InputScale scale = InputScale::from_box(
      2, std::vector<double>{0.5, 0.0}, std::vector<double>{1.5, 1.0});
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(0.5, 1.5);
    CHECK(std::abs(scale.from_unit(scale.to_unit(x, 0), 0) - x) < 1e-15);
  }

  // S in [0.5, 1.5] -> [-1, 1]: raw derivative is 2x the scaled one.
  CHECK(scale.factor(0) == 2.0);

  const LayerSpec spec{{2, 8, 1}};
  const MlpNetwork scaled = test::random_net(spec, scale, 21);
  MlpNetwork unit(spec, InputScale::identity(2));
  std::copy(scaled.params().begin(), scaled.params().end(),
            unit.params().begin());

  std::vector<Jet2> js(1), ju(1);
  scaled.forward_jets(std::vector<double>{1.25, 0.5}, js);
  unit.forward_jets(
      std::vector<double>{scale.to_unit(1.25, 0), scale.to_unit(0.5, 1)}, ju);
  CHECK(js[0].g[0] == doctest::Approx(2.0 * ju[0].g[0]).epsilon(1e-14));
  CHECK(js[0].hess(0, 0) ==
        doctest::Approx(4.0 * ju[0].hess(0, 0)).epsilon(1e-14));
}

TEST_CASE("zero-weight identity-scale net has zero jets") {
  const LayerSpec spec{{2, 4, 1}};
  const MlpNetwork net(spec, InputScale::identity(2));
  std::vector<Jet2> jets(1);
  net.forward_jets(std::vector<double>{0.3, -0.2}, jets);
  CHECK(jets[0].v == 0.0);
  for (int c = 0; c < kMaxDim; ++c) CHECK(jets[0].g[c] == 0.0);
  for (int c = 0; c < kHessPacked; ++c) CHECK(jets[0].h[c] == 0.0);
}

TEST_CASE("raw-coordinate second derivative matches finite differences") {
  const InputScale scale = InputScale::from_box(
      2, std::vector<double>{0.5, 0.0}, std::vector<double>{1.5, 1.0});
  const LayerSpec spec{{2, 10, 10, 1}};
  const MlpNetwork net = test::random_net(spec, scale, 77);
  const std::vector<double> x{0.9, 0.4};
  std::vector<Jet2> jets(1);
  net.forward_jets(x, jets);
  auto f = [&](const std::vector<double>& p) {
    std::vector<double> y(1);
    net.forward(p, 1, y);
    return y[0];
  };
  CHECK(test::rel_err(jets[0].hess(0, 0), test::fd2(f, x, 0, 0)) < 1e-5);
}

TEST_CASE("shape validation") {
  CHECK_THROWS_AS(param_count(LayerSpec{{5}}), std::invalid_argument);
  CHECK_THROWS_AS(param_count(LayerSpec{{2, 0, 1}}), std::invalid_argument);
  const LayerSpec spec{{2, 4, 1}};
  const MlpNetwork net(spec, InputScale::identity(2));
  std::vector<double> out(1);
  CHECK_THROWS_AS(net.forward(std::vector<double>{1.0}, 1, out),
                  std::invalid_argument);
}
