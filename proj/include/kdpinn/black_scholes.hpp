// SPDX-License-Identifier: Apache-2.0
//
// Closed-form European call price and the Greeks needed to check the
// pricing PDE pointwise. The normal CDF goes through erfc in double
// precision.

#pragma once

namespace kdpinn::black_scholes {

struct Params {
  double strike = 1.0;
  double rate = 0.05;
  double vol = 0.2;
  double maturity = 1.0;
};

double norm_cdf(double x);
double norm_pdf(double x);

/// Call value u(S, t) with t the calendar time in [0, T]. At t >= T the
/// terminal payoff max(S - K, 0) is returned.
double price(double S, double t, const Params& p);

double payoff(double S, const Params& p);

/// First and second derivatives of the price in S, and the calendar-time
/// derivative du/dt (the negative of the usual time-to-maturity theta).
double delta(double S, double t, const Params& p);
double gamma(double S, double t, const Params& p);
double theta_calendar(double S, double t, const Params& p);

/// u_t + r S u_S + 0.5 sigma^2 S^2 u_SS - r u evaluated with the analytic
/// Greeks; identically zero up to roundoff for t < T.
double pde_residual_closed_form(double S, double t, const Params& p);

}  // namespace kdpinn::black_scholes
