// SPDX-License-Identifier: Apache-2.0

#include "kdpinn/problems.hpp"

#include <cmath>
#include <stdexcept>

#include "kdpinn/allen_cahn_oracle.hpp"
#include "kdpinn/black_scholes.hpp"
#include "kdpinn/burgers_oracle.hpp"
#include "kdpinn/taylor_green.hpp"

namespace kdpinn {

namespace {
const double kPi = std::acos(-1.0);
}

std::string role_name(SampleRole role) {
  switch (role) {
    case SampleRole::kCollocation:
      return "collocation";
    case SampleRole::kBoundary:
      return "boundary";
    case SampleRole::kTerminal:
      return "terminal";
    case SampleRole::kInitial:
      return "initial";
    case SampleRole::kDistillation:
      return "distillation";
  }
  throw std::logic_error("unknown role");
}

const ConstraintSpec* PdeProblem::find_constraint(SampleRole role) const {
  for (const ConstraintSpec& c : constraints) {
    if (c.role == role) return &c;
  }
  return nullptr;
}

PdeProblem black_scholes_problem(double strike, double rate, double vol,
                                 double maturity) {
  if (!(vol > 0.0) || !(maturity > 0.0) || !(strike > 0.0)) {
    throw std::invalid_argument("black_scholes_problem: need sigma, T, K > 0");
  }
  black_scholes::Params bp{strike, rate, vol, maturity};

  PdeProblem p;
  p.name = "black_scholes";
  p.domain = DomainBox{2, {0.5, 0.0}, {1.5, maturity}, 1};
  p.n_outputs = 1;
  p.n_equations = 1;
  p.params = {{"K", strike}, {"r", rate}, {"sigma", vol}, {"T", maturity}};

  p.residual = [bp](const double* x, const Jet2* f, double* res) {
    const double S = x[0];
    res[0] = f[0].g[1] + bp.rate * S * f[0].g[0] +
             0.5 * bp.vol * bp.vol * S * S * f[0].h[0] - bp.rate * f[0].v;
  };
  p.residual_adjoint = [bp](const double* x, const Jet2*, const double* rb,
                            Jet2* fb) {
    const double S = x[0];
    fb[0].v += rb[0] * -bp.rate;
    fb[0].g[0] += rb[0] * bp.rate * S;
    fb[0].g[1] += rb[0];
    fb[0].h[0] += rb[0] * 0.5 * bp.vol * bp.vol * S * S;
  };

  const double s_lo = p.domain.lo[0], s_hi = p.domain.hi[0];
  p.constraints.push_back(ConstraintSpec{
      SampleRole::kBoundary,
      [s_lo, s_hi, maturity](const double* u, double* pt) {
        pt[0] = u[0] < 0.5 ? s_lo : s_hi;
        pt[1] = u[1] * maturity;
      },
      [bp](const double* x, double* tgt) {
        tgt[0] = black_scholes::price(x[0], x[1], bp);
      }});
  p.constraints.push_back(ConstraintSpec{
      SampleRole::kTerminal,
      [s_lo, s_hi, maturity](const double* u, double* pt) {
        pt[0] = s_lo + u[0] * (s_hi - s_lo);
        pt[1] = maturity;
      },
      [bp](const double* x, double* tgt) {
        tgt[0] = black_scholes::payoff(x[0], bp);
      }});

  p.reference.kind = ReferenceSolution::Kind::kClosedForm;
  p.reference.provenance = "analytic European-call formula (erf-based CDF)";
  p.reference.eval = [bp](const double* x, double* out) {
    out[0] = black_scholes::price(x[0], x[1], bp);
  };
  return p;
}

PdeProblem burgers_problem(double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("burgers_problem: nu must be > 0");

  PdeProblem p;
  p.name = "burgers";
  p.domain = DomainBox{2, {0.0, 0.0}, {1.0, 1.0}, 1};
  p.n_outputs = 1;
  p.n_equations = 1;
  p.params = {{"nu", nu}};

  p.residual = [nu](const double*, const Jet2* f, double* res) {
    res[0] = f[0].g[1] + f[0].v * f[0].g[0] - nu * f[0].h[0];
  };
  p.residual_adjoint = [nu](const double*, const Jet2* f, const double* rb,
                            Jet2* fb) {
    fb[0].v += rb[0] * f[0].g[0];
    fb[0].g[0] += rb[0] * f[0].v;
    fb[0].g[1] += rb[0];
    fb[0].h[0] -= rb[0] * nu;
  };

  p.constraints.push_back(ConstraintSpec{
      SampleRole::kBoundary,
      [](const double* u, double* pt) {
        pt[0] = u[0] < 0.5 ? 0.0 : 1.0;
        pt[1] = u[1];
      },
      [](const double*, double* tgt) { tgt[0] = 0.0; }});
  p.constraints.push_back(ConstraintSpec{
      SampleRole::kInitial,
      [](const double* u, double* pt) {
        pt[0] = u[0];
        pt[1] = 0.0;
      },
      [](const double* x, double* tgt) { tgt[0] = -std::sin(kPi * x[0]); }});

  auto oracle = std::make_shared<BurgersOracle>(nu);
  p.reference.kind = ReferenceSolution::Kind::kOracleGrid;
  p.reference.provenance = "Cole-Hopf Gauss-Hermite quadrature (grid-free)";
  p.reference.eval = [oracle](const double* x, double* out) {
    out[0] = oracle->value(x[0], x[1]);
  };
  return p;
}

PdeProblem allen_cahn_problem(double nu) {
  if (!(nu > 0.0)) {
    throw std::invalid_argument("allen_cahn_problem: nu must be > 0");
  }

  PdeProblem p;
  p.name = "allen_cahn";
  p.domain = DomainBox{2, {-1.0, 0.0}, {1.0, 1.0}, 1};
  p.n_outputs = 1;
  p.n_equations = 1;
  p.params = {{"nu", nu}};

  p.residual = [nu](const double*, const Jet2* f, double* res) {
    const double v = f[0].v;
    res[0] = f[0].g[1] - nu * f[0].h[0] + v * v * v - v;
  };
  p.residual_adjoint = [nu](const double*, const Jet2* f, const double* rb,
                            Jet2* fb) {
    const double v = f[0].v;
    fb[0].v += rb[0] * (3.0 * v * v - 1.0);
    fb[0].g[1] += rb[0];
    fb[0].h[0] -= rb[0] * nu;
  };

  p.constraints.push_back(ConstraintSpec{
      SampleRole::kBoundary,
      [](const double* u, double* pt) {
        pt[0] = u[0] < 0.5 ? -1.0 : 1.0;
        pt[1] = u[1];
      },
      [](const double*, double* tgt) { tgt[0] = 0.0; }});
  // The initial profile disagrees with the boundary targets at the two
  // corners (IC gives -1 there); both constraint sets are kept as given.
  p.constraints.push_back(ConstraintSpec{
      SampleRole::kInitial,
      [](const double* u, double* pt) {
        pt[0] = -1.0 + 2.0 * u[0];
        pt[1] = 0.0;
      },
      [](const double* x, double* tgt) {
        tgt[0] = x[0] * x[0] * std::cos(kPi * x[0]);
      }});

  auto oracle = std::make_shared<AllenCahnOracle>(nu);
  p.reference.kind = ReferenceSolution::Kind::kOracleGrid;
  p.reference.provenance = "Crank-Nicolson IMEX(AB2) on a 512x2000 grid";
  p.reference.eval = [oracle](const double* x, double* out) {
    out[0] = oracle->value(x[0], x[1]);
  };
  return p;
}

PdeProblem navier_stokes_problem(double nu) {
  if (!(nu > 0.0)) {
    throw std::invalid_argument("navier_stokes_problem: nu must be > 0");
  }
  const double two_pi = 2.0 * kPi;

  PdeProblem p;
  p.name = "navier_stokes";
  p.domain = DomainBox{3, {0.0, 0.0, 0.0}, {two_pi, two_pi, 1.0}, 2};
  p.n_outputs = 3;  // u, v, p
  p.n_equations = 3;
  p.params = {{"nu", nu}};

  // Input order (x, y, t); Hessian packed indices: xx=0, xy=1, yy=2.
  p.residual = [nu](const double*, const Jet2* f, double* res) {
    const Jet2& u = f[0];
    const Jet2& v = f[1];
    const Jet2& q = f[2];
    res[0] = u.g[2] + u.v * u.g[0] + v.v * u.g[1] + q.g[0] -
             nu * (u.h[0] + u.h[2]);
    res[1] = v.g[2] + u.v * v.g[0] + v.v * v.g[1] + q.g[1] -
             nu * (v.h[0] + v.h[2]);
    res[2] = u.g[0] + v.g[1];
  };
  p.residual_adjoint = [nu](const double*, const Jet2* f, const double* rb,
                            Jet2* fb) {
    const Jet2& u = f[0];
    const Jet2& v = f[1];
    // x-momentum
    fb[0].g[2] += rb[0];
    fb[0].v += rb[0] * u.g[0];
    fb[0].g[0] += rb[0] * u.v;
    fb[1].v += rb[0] * u.g[1];
    fb[0].g[1] += rb[0] * v.v;
    fb[2].g[0] += rb[0];
    fb[0].h[0] -= rb[0] * nu;
    fb[0].h[2] -= rb[0] * nu;
    // y-momentum
    fb[1].g[2] += rb[1];
    fb[0].v += rb[1] * v.g[0];
    fb[1].g[0] += rb[1] * u.v;
    fb[1].v += rb[1] * v.g[1];
    fb[1].g[1] += rb[1] * v.v;
    fb[2].g[1] += rb[1];
    fb[1].h[0] -= rb[1] * nu;
    fb[1].h[2] -= rb[1] * nu;
    // divergence
    fb[0].g[0] += rb[2];
    fb[1].g[1] += rb[2];
  };

  auto exact = [nu](const double* x, double* out) {
    const taylor_green::Field f = taylor_green::eval(x[0], x[1], x[2], nu);
    out[0] = f.u;
    out[1] = f.v;
    out[2] = f.p;
  };

  p.constraints.push_back(ConstraintSpec{
      SampleRole::kBoundary,
      [two_pi](const double* u, double* pt) {
        const int face = std::min(3, static_cast<int>(u[0] * 4.0));
        const double along = u[1] * two_pi;
        switch (face) {
          case 0: pt[0] = 0.0;    pt[1] = along; break;
          case 1: pt[0] = two_pi; pt[1] = along; break;
          case 2: pt[0] = along;  pt[1] = 0.0;   break;
          default: pt[0] = along; pt[1] = two_pi; break;
        }
        pt[2] = u[2];
      },
      exact});
  p.constraints.push_back(ConstraintSpec{
      SampleRole::kInitial,
      [two_pi](const double* u, double* pt) {
        pt[0] = u[0] * two_pi;
        pt[1] = u[1] * two_pi;
        pt[2] = 0.0;
      },
      exact});

  p.reference.kind = ReferenceSolution::Kind::kClosedForm;
  p.reference.provenance = "decaying Taylor-Green vortex";
  p.reference.eval = exact;
  return p;
}

PdeProblem problem_by_name(const std::string& name) {
  if (name == "black_scholes") return black_scholes_problem(1.0, 0.05, 0.2, 1.0);
  if (name == "burgers") return burgers_problem(kBurgersDefaultNu);
  if (name == "allen_cahn") return allen_cahn_problem(kAllenCahnDefaultNu);
  if (name == "navier_stokes") {
    return navier_stokes_problem(kNavierStokesDefaultNu);
  }
  throw std::invalid_argument("unknown problem: " + name);
}

}  // namespace kdpinn
