// SPDX-License-Identifier: Apache-2.0
//
// Shared test oracles: central finite differences for input derivatives
// (h = 1e-4) and parameter derivatives (h = 1e-6 scaled), plus small
// helpers for random nets. These stay independent of the jet/tape
// implementation paths they check.

#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "kdpinn/net.hpp"
#include "kdpinn/rng.hpp"

namespace kdpinn::test {

inline constexpr double kFdInputStep = 1e-4;

/// Central first difference of f along coordinate i.
inline double fd1(const std::function<double(const std::vector<double>&)>& f,
                  std::vector<double> x, int i, double h = kFdInputStep) {
  x[i] += h;
  const double up = f(x);
  x[i] -= 2 * h;
  const double dn = f(x);
  return (up - dn) / (2 * h);
}

/// Central second difference; diagonal uses the 3-point stencil, mixed
/// partials the 4-point one.
inline double fd2(const std::function<double(const std::vector<double>&)>& f,
                  std::vector<double> x, int i, int j,
                  double h = kFdInputStep) {
  if (i == j) {
    const double mid = f(x);
    x[i] += h;
    const double up = f(x);
    x[i] -= 2 * h;
    const double dn = f(x);
    return (up - 2 * mid + dn) / (h * h);
  }
  x[i] += h;
  x[j] += h;
  const double pp = f(x);
  x[j] -= 2 * h;
  const double pm = f(x);
  x[i] -= 2 * h;
  const double mm = f(x);
  x[j] += 2 * h;
  const double mp = f(x);
  return (pp - pm - mp + mm) / (4 * h * h);
}

/// Relative error with the spec's 1 + |reference| guard.
inline double rel_err(double value, double reference) {
  return std::abs(value - reference) / (1.0 + std::abs(reference));
}

/// Central difference of a scalar loss with respect to parameter k,
/// h = 1e-6 * max(1, |theta_k|).
inline double fd_param(const std::function<double()>& loss, MlpNetwork& net,
                       std::size_t k) {
  const double theta = net.params()[k];
  const double h = 1e-6 * std::max(1.0, std::abs(theta));
  net.params()[k] = theta + h;
  const double up = loss();
  net.params()[k] = theta - h;
  const double dn = loss();
  net.params()[k] = theta;
  return (up - dn) / (2 * h);
}

inline MlpNetwork random_net(const LayerSpec& spec, const InputScale& scale,
                             std::uint64_t seed) {
  return MlpNetwork::xavier(spec, scale, seed);
}

}  // namespace kdpinn::test
