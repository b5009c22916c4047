// SPDX-License-Identifier: Apache-2.0

#include "kdpinn/taylor_green.hpp"

#include <cmath>

namespace kdpinn::taylor_green {

Field eval(double x, double y, double t, double nu) {
  const double e = std::exp(-2.0 * nu * t);
  const double e2 = e * e;
  return {std::cos(x) * std::sin(y) * e, -std::sin(x) * std::cos(y) * e,
          -0.25 * (std::cos(2.0 * x) + std::cos(2.0 * y)) * e2};
}

Residuals residuals_closed_form(double x, double y, double t, double nu) {
  const double e = std::exp(-2.0 * nu * t);
  const double e2 = e * e;
  const double cx = std::cos(x), sx = std::sin(x);
  const double cy = std::cos(y), sy = std::sin(y);

  const double u = cx * sy * e;
  const double v = -sx * cy * e;
  const double u_t = -2.0 * nu * u;
  const double v_t = -2.0 * nu * v;
  const double u_x = -sx * sy * e;
  const double u_y = cx * cy * e;
  const double v_x = -cx * cy * e;
  const double v_y = sx * sy * e;
  const double lap_u = -2.0 * u;
  const double lap_v = -2.0 * v;
  const double p_x = 0.5 * std::sin(2.0 * x) * e2;
  const double p_y = 0.5 * std::sin(2.0 * y) * e2;

  return {u_t + u * u_x + v * u_y + p_x - nu * lap_u,
          v_t + u * v_x + v * v_y + p_y - nu * lap_v, u_x + v_y};
}

double kinetic_energy_exact(double t, double nu) {
  // 0.5 * integral of (u^2 + v^2) over [0, 2pi]^2.
  const double pi = std::acos(-1.0);
  return 0.5 * 2.0 * pi * pi * std::exp(-4.0 * nu * t);
}

}  // namespace kdpinn::taylor_green
