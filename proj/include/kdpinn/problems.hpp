// SPDX-License-Identifier: Apache-2.0
//
// The four PDE benchmarks: residual operators over jets (with hand-derived
// adjoints for the reverse pass), constraint loci with target functions,
// and reference solutions. Problems are immutable after construction and
// all evaluators are pure.

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "kdpinn/jet.hpp"

namespace kdpinn {

enum class SampleRole {
  kCollocation,
  kBoundary,
  kTerminal,
  kInitial,
  kDistillation,
};

std::string role_name(SampleRole role);

struct DomainBox {
  int dim = 2;
  std::array<double, kMaxDim> lo{};
  std::array<double, kMaxDim> hi{};
  int time_index = 1;

  bool contains(const double* x) const {
    for (int i = 0; i < dim; ++i) {
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    }
    return true;
  }
  double width(int i) const { return hi[i] - lo[i]; }
};

struct ReferenceSolution {
  enum class Kind { kClosedForm, kOracleGrid };
  Kind kind = Kind::kClosedForm;
  /// point (raw coordinates) -> one value per output channel.
  std::function<void(const double* x, double* out)> eval;
  std::string provenance;
};

/// A constraint locus (boundary / terminal / initial) with its target.
/// map_point turns `dim` uniform variates in [0,1) into a point lying
/// exactly on the locus; target fills one value per output channel.
struct ConstraintSpec {
  SampleRole role;
  std::function<void(const double* unit, double* point)> map_point;
  std::function<void(const double* x, double* target)> target;
};

struct PdeProblem {
  std::string name;
  DomainBox domain;
  int n_outputs = 1;
  int n_equations = 1;
  std::map<std::string, double> params;

  /// Governing-equation residuals from the output jets at one point.
  std::function<void(const double* x, const Jet2* fields, double* res)>
      residual;
  /// Accumulates d(res . res_bar)/d(jet components) into field_bars.
  std::function<void(const double* x, const Jet2* fields,
                     const double* res_bar, Jet2* field_bars)>
      residual_adjoint;

  std::vector<ConstraintSpec> constraints;
  ReferenceSolution reference;

  const ConstraintSpec* find_constraint(SampleRole role) const;
  bool has_constraint(SampleRole role) const {
    return find_constraint(role) != nullptr;
  }
};

/// Black-Scholes European call on [0.5,1.5]x[0,1]: terminal payoff,
/// boundary targets from the closed form, closed-form reference.
PdeProblem black_scholes_problem(double strike, double rate, double vol,
                                 double maturity);

/// Viscous Burgers on [0,1]^2, IC -sin(pi x), zero boundaries; Cole-Hopf
/// quadrature reference.
PdeProblem burgers_problem(double nu);

/// Allen-Cahn on [-1,1]x[0,1], IC x^2 cos(pi x), zero boundaries;
/// Crank-Nicolson IMEX reference on a 512x2000 grid.
PdeProblem allen_cahn_problem(double nu);

/// Incompressible Navier-Stokes on (0,2pi)^2 x (0,1] with the decaying
/// Taylor-Green vortex as reference; boundary and initial targets are
/// taken from the exact field.
PdeProblem navier_stokes_problem(double nu);

PdeProblem problem_by_name(const std::string& name);

inline constexpr double kBurgersDefaultNu = 0.01 / 3.14159265358979323846;
inline constexpr double kAllenCahnDefaultNu = 1e-3;
inline constexpr double kNavierStokesDefaultNu = 1e-2;

}  // namespace kdpinn
