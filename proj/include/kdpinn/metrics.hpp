// SPDX-License-Identifier: Apache-2.0
//
// Accuracy, calibration, correlation and distance metrics, plus the
// residual/error transfer-bound arithmetic. Everything here is a pure
// function of its inputs.

#pragma once

#include <optional>
#include <vector>

#include "kdpinn/net.hpp"
#include "kdpinn/problems.hpp"

namespace kdpinn {

/// Uniform evaluation grid with endpoint-inclusive axes and row-major
/// deterministic ordering (last axis fastest).
struct EvalGrid {
  DomainBox box;
  std::array<int, kMaxDim> res{};
  std::vector<double> points;  // row-major [n][dim]

  static EvalGrid uniform(const DomainBox& box, std::array<int, kMaxDim> res);
  /// Protocol grids: 100x50 for the 2-input problems, 24x24x6 for the
  /// 3-input one.
  static EvalGrid for_problem(const PdeProblem& problem);

  std::size_t n() const { return points.size() / box.dim; }
  const double* point(std::size_t i) const { return points.data() + i * box.dim; }
  /// Quadrature cell volume (uniform weights x cell size).
  double cell_volume() const;
};

struct AccuracyReport {
  double rmse = 0.0;
  double rel_l2 = 0.0;
  bool rel_l2_defined = true;  // false when the reference norm underflows
  std::size_t n_points = 0;
};

AccuracyReport accuracy(std::span<const double> pred,
                        std::span<const double> ref);

struct CorrelationReport {
  double rho = 0.0;  // Pearson correlation of signed errors
  double r2 = 0.0;   // squared correlation of |errors| (variance alignment)
  bool defined = true;
};

CorrelationReport residual_correlation(std::span<const double> teacher_err,
                                       std::span<const double> student_err);

/// Coefficient of determination of pred against ref; empty when the
/// reference has zero variance.
std::optional<double> calibration_r2(std::span<const double> pred,
                                     std::span<const double> ref);

/// L-infinity distance to a box: 0 inside, max coordinate overshoot
/// outside.
double dist_linf_to_box(const double* x, const DomainBox& box);

struct ErrorDistanceBins {
  std::vector<double> edges;            // n_bins + 1 edges over [0, max d]
  std::vector<double> median_abs_err;   // NaN for empty bins
  std::vector<std::size_t> counts;
};

ErrorDistanceBins error_vs_distance(std::span<const double> abs_err,
                                    std::span<const double> dist, int n_bins);

struct TransferBoundInputs {
  double teacher_error = 0.0;     // epsilon_T
  double teacher_residual = 0.0;  // delta_T
  double student_distance = 0.0;  // epsilon_D
  double lipschitz = 0.0;         // L
  double kappa = 0.0;             // stability constant (user supplied)
};

struct TransferBounds {
  double residual_bound = 0.0;  // L eps_D + delta_T
  double error_bound = 0.0;     // eps_T + kappa (L eps_D + delta_T)
};

TransferBounds transfer_bounds(const TransferBoundInputs& in);

/// Field evaluation helpers. Network/reference fields are row-major
/// [n][n_outputs]; residual fields are [n][n_equations].
std::vector<double> eval_network_field(const MlpNetwork& net,
                                       const EvalGrid& grid,
                                       bool parallel = false);
std::vector<double> eval_reference_field(const PdeProblem& problem,
                                         const EvalGrid& grid);
std::vector<double> eval_residual_field(const PdeProblem& problem,
                                        const MlpNetwork& net,
                                        const EvalGrid& grid,
                                        bool parallel = false);

/// Grid-quadrature L2 norm: sqrt(sum v_i^2 * cell volume).
double grid_l2_norm(std::span<const double> values, const EvalGrid& grid);

/// Subtracts the per-time-slice spatial mean from one output channel of a
/// field (the pressure gauge for Navier-Stokes comparisons). The grid's
/// time axis must be the last one.
void remove_time_slice_mean(std::vector<double>& field, const EvalGrid& grid,
                            int channel, int n_outputs);

/// Empirical Lipschitz surrogate for the residual operator: the largest
/// ratio ||N[u] - N[v]|| / ||u - v|| over all checkpoint pairs (grid
/// quadrature norms). Needs at least two networks.
double estimate_lipschitz(const PdeProblem& problem,
                          std::span<const MlpNetwork* const> nets,
                          const EvalGrid& grid, bool parallel = false);

/// RMSE of a network against the problem reference over a grid, across
/// all output channels (no gauge adjustment; used for training probes).
double probe_rmse(const MlpNetwork& net, const PdeProblem& problem,
                  const EvalGrid& grid, std::span<const double> ref_field,
                  bool parallel = false);

}  // namespace kdpinn
