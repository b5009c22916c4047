// SPDX-License-Identifier: Apache-2.0
//
// Reference solution of viscous Burgers with u(x,0) = -sin(pi x) via the
// Cole-Hopf transform: u = -2 nu phi_x / phi where phi solves the heat
// equation. The heat-kernel convolution is evaluated with Gauss-Hermite
// quadrature; x-derivatives fall on the initial condition analytically,
// so u, u_x and u_xx come from the same node set.

#pragma once

#include <vector>

namespace kdpinn {

/// Nodes and weights for integral over R of exp(-z^2) f(z) dz.
void gauss_hermite(int n, std::vector<double>& nodes,
                   std::vector<double>& weights);

class BurgersOracle {
 public:
  explicit BurgersOracle(double nu, int quad_nodes = 160);

  double nu() const { return nu_; }
  int quad_nodes() const { return static_cast<int>(nodes_.size()); }

  double value(double x, double t) const;

  struct Derivs {
    double u, u_x, u_xx;
  };
  /// Spatial derivatives via analytic differentiation under the integral.
  Derivs derivs(double x, double t) const;

 private:
  double nu_;
  std::vector<double> nodes_, weights_;

  // phi_x^(k) / phi for k = 1..3, exponent-shifted for stability.
  void phi_ratios(double x, double t, double& r1, double& r2,
                  double& r3) const;
};

}  // namespace kdpinn
