// SPDX-License-Identifier: Apache-2.0

#include "kdpinn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kdpinn/parallel.hpp"

namespace kdpinn {

EvalGrid EvalGrid::uniform(const DomainBox& box, std::array<int, kMaxDim> res) {
  EvalGrid grid;
  grid.box = box;
  grid.res = res;
  std::size_t n = 1;
  for (int a = 0; a < box.dim; ++a) {
    if (res[a] < 2) throw std::invalid_argument("EvalGrid: resolution >= 2");
    n *= static_cast<std::size_t>(res[a]);
  }
  grid.points.reserve(n * box.dim);
  std::array<int, kMaxDim> idx{};
  for (std::size_t flat = 0; flat < n; ++flat) {
    std::size_t rem = flat;
    for (int a = box.dim - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % res[a]);
      rem /= res[a];
    }
    for (int a = 0; a < box.dim; ++a) {
      grid.points.push_back(box.lo[a] +
                            box.width(a) * idx[a] / (res[a] - 1.0));
    }
  }
  return grid;
}

EvalGrid EvalGrid::for_problem(const PdeProblem& problem) {
  if (problem.domain.dim == 2) {
    return uniform(problem.domain, {100, 50, 1});
  }
  return uniform(problem.domain, {24, 24, 6});
}

double EvalGrid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < box.dim; ++a) v *= box.width(a) / (res[a] - 1.0);
  return v;
}

AccuracyReport accuracy(std::span<const double> pred,
                        std::span<const double> ref) {
  if (pred.size() != ref.size() || pred.empty()) {
    throw std::invalid_argument("accuracy: field length mismatch");
  }
  double se = 0.0, ref2 = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - ref[i];
    se += e * e;
    ref2 += ref[i] * ref[i];
  }
  AccuracyReport r;
  r.n_points = pred.size();
  r.rmse = std::sqrt(se / static_cast<double>(pred.size()));
  r.rel_l2_defined = std::sqrt(ref2) >= 1e-300;
  r.rel_l2 = r.rel_l2_defined ? std::sqrt(se) / std::sqrt(ref2)
                              : std::numeric_limits<double>::infinity();
  return r;
}

namespace {
double pearson(std::span<const double> a, std::span<const double> b,
               bool& defined) {
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) {
    defined = false;
    return 0.0;
  }
  return sab / std::sqrt(saa * sbb);
}
}  // namespace

CorrelationReport residual_correlation(std::span<const double> teacher_err,
                                       std::span<const double> student_err) {
  if (teacher_err.size() != student_err.size() || teacher_err.size() < 3) {
    throw std::invalid_argument("residual_correlation: need n >= 3");
  }
  CorrelationReport rep;
  bool ok1 = true, ok2 = true;
  rep.rho = pearson(teacher_err, student_err, ok1);
  std::vector<double> ta(teacher_err.size()), sa(student_err.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    ta[i] = std::abs(teacher_err[i]);
    sa[i] = std::abs(student_err[i]);
  }
  const double rho_abs = pearson(ta, sa, ok2);
  rep.r2 = rho_abs * rho_abs;
  rep.defined = ok1 && ok2;
  return rep;
}

std::optional<double> calibration_r2(std::span<const double> pred,
                                     std::span<const double> ref) {
  if (pred.size() != ref.size() || pred.size() < 3) {
    throw std::invalid_argument("calibration_r2: need n >= 3");
  }
  double mean = 0.0;
  for (double r : ref) mean += r;
  mean /= static_cast<double>(ref.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ss_res += (pred[i] - ref[i]) * (pred[i] - ref[i]);
    ss_tot += (ref[i] - mean) * (ref[i] - mean);
  }
  if (ss_tot <= 0.0) return std::nullopt;
  return 1.0 - ss_res / ss_tot;
}

double dist_linf_to_box(const double* x, const DomainBox& box) {
  double d = 0.0;
  for (int a = 0; a < box.dim; ++a) {
    d = std::max(d, std::max(0.0, std::max(box.lo[a] - x[a], x[a] - box.hi[a])));
  }
  return d;
}

ErrorDistanceBins error_vs_distance(std::span<const double> abs_err,
                                    std::span<const double> dist, int n_bins) {
  if (abs_err.size() != dist.size() || abs_err.empty() || n_bins < 1) {
    throw std::invalid_argument("error_vs_distance: bad inputs");
  }
  const double d_max = *std::max_element(dist.begin(), dist.end());
  ErrorDistanceBins out;
  out.edges.resize(n_bins + 1);
  for (int b = 0; b <= n_bins; ++b) {
    out.edges[b] = d_max * b / static_cast<double>(n_bins);
  }
  std::vector<std::vector<double>> buckets(n_bins);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    int b = d_max > 0.0
                ? std::min(n_bins - 1,
                           static_cast<int>(dist[i] / d_max * n_bins))
                : 0;
    buckets[b].push_back(abs_err[i]);
  }
  out.median_abs_err.resize(n_bins);
  out.counts.resize(n_bins);
  for (int b = 0; b < n_bins; ++b) {
    out.counts[b] = buckets[b].size();
    if (buckets[b].empty()) {
      out.median_abs_err[b] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    auto& v = buckets[b];
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    out.median_abs_err[b] =
        v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  }
  return out;
}

TransferBounds transfer_bounds(const TransferBoundInputs& in) {
  if (in.teacher_error < 0 || in.teacher_residual < 0 ||
      in.student_distance < 0 || in.lipschitz < 0 || in.kappa < 0) {
    throw std::invalid_argument("transfer_bounds: inputs must be >= 0");
  }
  TransferBounds b;
  b.residual_bound = in.lipschitz * in.student_distance + in.teacher_residual;
  b.error_bound = in.teacher_error + in.kappa * b.residual_bound;
  return b;
}

std::vector<double> eval_network_field(const MlpNetwork& net,
                                       const EvalGrid& grid, bool parallel) {
  std::vector<double> out(grid.n() *
                          static_cast<std::size_t>(net.spec().output_dim()));
  net.forward(grid.points, grid.n(), out, parallel);
  return out;
}

std::vector<double> eval_reference_field(const PdeProblem& problem,
                                         const EvalGrid& grid) {
  std::vector<double> out(grid.n() *
                          static_cast<std::size_t>(problem.n_outputs));
  for (std::size_t i = 0; i < grid.n(); ++i) {
    problem.reference.eval(grid.point(i),
                           out.data() + i * problem.n_outputs);
  }
  return out;
}

std::vector<double> eval_residual_field(const PdeProblem& problem,
                                        const MlpNetwork& net,
                                        const EvalGrid& grid, bool parallel) {
  std::vector<double> out(grid.n() *
                          static_cast<std::size_t>(problem.n_equations));
  parallel_for(
      grid.n(),
      [&](std::size_t i) {
        Jet2 jets[8];
        net.forward_jets({grid.point(i), static_cast<std::size_t>(grid.box.dim)},
                         {jets, static_cast<std::size_t>(problem.n_outputs)});
        problem.residual(grid.point(i), jets, out.data() + i * problem.n_equations);
      },
      parallel);
  return out;
}

double grid_l2_norm(std::span<const double> values, const EvalGrid& grid) {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s * grid.cell_volume());
}

void remove_time_slice_mean(std::vector<double>& field, const EvalGrid& grid,
                            int channel, int n_outputs) {
  const int t_res = grid.res[grid.box.dim - 1];
  const std::size_t n = grid.n();
  const std::size_t per_slice = n / t_res;
  // Last axis fastest: point i belongs to time slice i % t_res.
  for (int k = 0; k < t_res; ++k) {
    double mean = 0.0;
    for (std::size_t i = static_cast<std::size_t>(k); i < n;
         i += static_cast<std::size_t>(t_res)) {
      mean += field[i * n_outputs + channel];
    }
    mean /= static_cast<double>(per_slice);
    for (std::size_t i = static_cast<std::size_t>(k); i < n;
         i += static_cast<std::size_t>(t_res)) {
      field[i * n_outputs + channel] -= mean;
    }
  }
}

double estimate_lipschitz(const PdeProblem& problem,
                          std::span<const MlpNetwork* const> nets,
                          const EvalGrid& grid, bool parallel) {
  if (nets.size() < 2) {
    throw std::invalid_argument("estimate_lipschitz: need >= 2 networks");
  }
  std::vector<std::vector<double>> fields, residuals;
  for (const MlpNetwork* net : nets) {
    fields.push_back(eval_network_field(*net, grid, parallel));
    residuals.push_back(eval_residual_field(problem, *net, grid, parallel));
  }
  double best = 0.0;
  std::vector<double> df, dr;
  for (std::size_t a = 0; a < nets.size(); ++a) {
    for (std::size_t b = a + 1; b < nets.size(); ++b) {
      df.assign(fields[a].size(), 0.0);
      dr.assign(residuals[a].size(), 0.0);
      for (std::size_t i = 0; i < df.size(); ++i) {
        df[i] = fields[a][i] - fields[b][i];
      }
      for (std::size_t i = 0; i < dr.size(); ++i) {
        dr[i] = residuals[a][i] - residuals[b][i];
      }
      const double du = grid_l2_norm(df, grid);
      if (du <= 0.0) continue;
      best = std::max(best, grid_l2_norm(dr, grid) / du);
    }
  }
  return best;
}

double probe_rmse(const MlpNetwork& net, const PdeProblem& problem,
                  const EvalGrid& grid, std::span<const double> ref_field,
                  bool parallel) {
  std::vector<double> pred = eval_network_field(net, grid, parallel);
  (void)problem;
  double se = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - ref_field[i];
    se += e * e;
  }
  return std::sqrt(se / static_cast<double>(pred.size()));
}

}  // namespace kdpinn
