// SPDX-License-Identifier: Apache-2.0

#include "kdpinn/black_scholes.hpp"

#include <algorithm>
#include <cmath>

namespace kdpinn::black_scholes {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

struct D12 {
  double d1, d2, sqrt_tau;
};

D12 d_terms(double S, double tau, const Params& p) {
  const double st = p.vol * std::sqrt(tau);
  const double d1 =
      (std::log(S / p.strike) + (p.rate + 0.5 * p.vol * p.vol) * tau) / st;
  return {d1, d1 - st, std::sqrt(tau)};
}
}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double payoff(double S, const Params& p) { return std::max(S - p.strike, 0.0); }

double price(double S, double t, const Params& p) {
  const double tau = p.maturity - t;
  if (tau <= 0.0) return payoff(S, p);
  if (S <= 0.0) return 0.0;
  const D12 d = d_terms(S, tau, p);
  return S * norm_cdf(d.d1) -
         p.strike * std::exp(-p.rate * tau) * norm_cdf(d.d2);
}

double delta(double S, double t, const Params& p) {
  const double tau = p.maturity - t;
  if (tau <= 0.0) return S > p.strike ? 1.0 : 0.0;
  return norm_cdf(d_terms(S, tau, p).d1);
}

double gamma(double S, double t, const Params& p) {
  const double tau = p.maturity - t;
  if (tau <= 0.0) return 0.0;
  const D12 d = d_terms(S, tau, p);
  return norm_pdf(d.d1) / (S * p.vol * d.sqrt_tau);
}

double theta_calendar(double S, double t, const Params& p) {
  const double tau = p.maturity - t;
  if (tau <= 0.0) return 0.0;
  const D12 d = d_terms(S, tau, p);
  // Calendar-time derivative, i.e. minus the tau derivative.
  return -S * norm_pdf(d.d1) * p.vol / (2.0 * d.sqrt_tau) -
         p.rate * p.strike * std::exp(-p.rate * tau) * norm_cdf(d.d2);
}

double pde_residual_closed_form(double S, double t, const Params& p) {
  const double u = price(S, t, p);
  return theta_calendar(S, t, p) + p.rate * S * delta(S, t, p) +
         0.5 * p.vol * p.vol * S * S * gamma(S, t, p) - p.rate * u;
}

}  // namespace kdpinn::black_scholes
