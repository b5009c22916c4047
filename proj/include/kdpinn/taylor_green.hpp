// SPDX-License-Identifier: Apache-2.0
//
// Decaying Taylor-Green vortex: the exact 2-D incompressible Navier-Stokes
// solution used as reference, with the analytic derivatives needed to
// verify the momentum and divergence equations pointwise.

#pragma once

namespace kdpinn::taylor_green {

struct Field {
  double u, v, p;
};

Field eval(double x, double y, double t, double nu);

/// Momentum residuals (x, y) and divergence of the exact field, computed
/// from analytic derivatives. All three vanish identically.
struct Residuals {
  double mom_x, mom_y, divergence;
};

Residuals residuals_closed_form(double x, double y, double t, double nu);

/// Kinetic energy of the exact field over the periodic box: decays as
/// E(t) = E(0) exp(-4 nu t).
double kinetic_energy_exact(double t, double nu);

}  // namespace kdpinn::taylor_green
