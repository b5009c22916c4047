// SPDX-License-Identifier: Apache-2.0

#include "kdpinn/burgers_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace kdpinn {

void gauss_hermite(int n, std::vector<double>& nodes,
                   std::vector<double>& weights) {
  if (n < 2) throw std::invalid_argument("gauss_hermite: need n >= 2");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const double pi_m4 = 0.7511255444649425;  // pi^(-1/4)
  const int m = (n + 1) / 2;
  double z = 0.0, pp = 0.0;
  for (int i = 0; i < m; ++i) {
    // Standard initial guesses, then Newton on the orthonormal recurrence.
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) -
          1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(n, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * nodes[1];
    } else {
      z = 2.0 * z - nodes[i - 2];
    }
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pi_m4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
             std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    nodes[i] = z;
    nodes[n - 1 - i] = -z;
    weights[i] = 2.0 / (pp * pp);
    weights[n - 1 - i] = weights[i];
  }
}

BurgersOracle::BurgersOracle(double nu, int quad_nodes) : nu_(nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("BurgersOracle: nu must be > 0");
  gauss_hermite(quad_nodes, nodes_, weights_);
}

void BurgersOracle::phi_ratios(double x, double t, double& r1, double& r2,
                               double& r3) const {
  const double pi = std::acos(-1.0);
  const double a = t > 0.0 ? 2.0 * std::sqrt(nu_ * t) : 0.0;
  const int n = static_cast<int>(nodes_.size());

  // Initial condition of the heat problem: phi0 = exp(g), with
  // g(eta) = (1 - cos(pi eta)) / (2 pi nu). Exponents are shifted by the
  // node maximum before exponentiating; the shift cancels in the ratios.
  double gmax = -1.0;
  std::vector<double> g(n), q(n);
  for (int i = 0; i < n; ++i) {
    const double eta = x - a * nodes_[i];
    g[i] = (1.0 - std::cos(pi * eta)) / (2.0 * pi * nu_);
    q[i] = std::sin(pi * eta) / (2.0 * nu_);
    if (g[i] > gmax) gmax = g[i];
  }
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double eta = x - a * nodes_[i];
    const double f = weights_[i] * std::exp(g[i] - gmax);
    const double qp = pi * std::cos(pi * eta) / (2.0 * nu_);
    const double qpp = -pi * pi * std::sin(pi * eta) / (2.0 * nu_);
    s0 += f;
    s1 += f * q[i];
    s2 += f * (qp + q[i] * q[i]);
    s3 += f * (qpp + 3.0 * q[i] * qp + q[i] * q[i] * q[i]);
  }
  r1 = s1 / s0;
  r2 = s2 / s0;
  r3 = s3 / s0;
}

double BurgersOracle::value(double x, double t) const {
  double r1, r2, r3;
  phi_ratios(x, t, r1, r2, r3);
  return -2.0 * nu_ * r1;
}

BurgersOracle::Derivs BurgersOracle::derivs(double x, double t) const {
  double r1, r2, r3;
  phi_ratios(x, t, r1, r2, r3);
  Derivs d;
  d.u = -2.0 * nu_ * r1;
  d.u_x = -2.0 * nu_ * (r2 - r1 * r1);
  d.u_xx = -2.0 * nu_ * (r3 - 3.0 * r2 * r1 + 2.0 * r1 * r1 * r1);
  return d;
}

}  // namespace kdpinn
