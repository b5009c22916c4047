// SPDX-License-Identifier: Apache-2.0

#include "kdpinn/allen_cahn_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "kdpinn/io.hpp"

namespace kdpinn {

namespace {

double initial_condition(double x) {
  return x * x * std::cos(std::acos(-1.0) * x);
}

// 4-point Lagrange interpolation on a uniform axis.
double cubic_interp(const double* y, double s) {
  // s in [0,1] measured from node 1 of the 4-point stencil.
  const double sm = s - 1.0;
  const double sp = s + 1.0;
  const double s2 = s - 2.0;
  return y[0] * (s * sm * s2) / -6.0 + y[1] * (sp * sm * s2) / 2.0 +
         y[2] * (sp * s * s2) / -2.0 + y[3] * (sp * s * sm) / 6.0;
}

double interp_axis(const std::vector<double>& vals, double pos, int n) {
  // pos is the fractional node index.
  if (n == 1) return vals[0];
  double clamped = std::clamp(pos, 0.0, static_cast<double>(n - 1));
  int i = static_cast<int>(std::floor(clamped));
  i = std::clamp(i, 0, n - 2);
  if (n < 4) {
    const double s = clamped - i;
    return vals[i] * (1.0 - s) + vals[i + 1] * s;
  }
  int i0 = std::clamp(i - 1, 0, n - 4);
  // cubic_interp measures s from the second stencil node.
  return cubic_interp(vals.data() + i0, clamped - i0 - 1.0);
}

}  // namespace

AllenCahnOracle::AllenCahnOracle(double nu, int nx, int nt, int store_every)
    : nu_(nu), nx_(nx), nt_(nt), store_every_(store_every) {
  if (!(nu > 0.0)) throw std::invalid_argument("AllenCahnOracle: nu must be > 0");
  if (nx < 8 || nt < 2 || store_every < 1 || nt % store_every != 0) {
    throw std::invalid_argument("AllenCahnOracle: bad grid settings");
  }
  dx_ = 2.0 / (nx - 1);
  dt_ = 1.0 / nt;
  solve();
}

void AllenCahnOracle::solve() {
  const int n = nx_;
  const int interior = n - 2;
  const double alpha = nu_ * dt_ / (2.0 * dx_ * dx_);

  std::vector<double> u(n), react_prev(n), react(n), rhs(interior);
  for (int i = 0; i < n; ++i) u[i] = initial_condition(-1.0 + i * dx_);

  slices_.clear();
  slices_.reserve(static_cast<std::size_t>(nt_ / store_every_) + 1);
  slices_.push_back(u);

  // Thomas algorithm workspaces for the constant tridiagonal system
  // (1 + 2a) on the diagonal, -a off-diagonal.
  std::vector<double> cp(interior), dp(interior);

  auto reaction = [](double v) { return v - v * v * v; };

  for (int i = 0; i < n; ++i) react_prev[i] = reaction(u[i]);

  for (int step = 1; step <= nt_; ++step) {
    for (int i = 0; i < n; ++i) react[i] = reaction(u[i]);
    for (int i = 1; i < n - 1; ++i) {
      // AB2 extrapolation of the reaction; first step falls back to Euler.
      const double r = (step == 1)
                           ? react[i]
                           : 1.5 * react[i] - 0.5 * react_prev[i];
      rhs[i - 1] = u[i] + alpha * (u[i + 1] - 2.0 * u[i] + u[i - 1]) + dt_ * r;
    }
    // Dirichlet boundaries are zero for t > 0, so no boundary terms enter
    // the right-hand side of the implicit solve.
    const double b = 1.0 + 2.0 * alpha;
    cp[0] = -alpha / b;
    dp[0] = rhs[0] / b;
    for (int i = 1; i < interior; ++i) {
      const double m = b + alpha * cp[i - 1];
      cp[i] = -alpha / m;
      dp[i] = (rhs[i] + alpha * dp[i - 1]) / m;
    }
    u[n - 2] = dp[interior - 1];
    for (int i = interior - 2; i >= 0; --i) {
      u[i + 1] = dp[i] - cp[i] * u[i + 2];
    }
    u[0] = 0.0;
    u[n - 1] = 0.0;
    std::swap(react, react_prev);
    if (step % store_every_ == 0) slices_.push_back(u);
  }
}

double AllenCahnOracle::slice_time(std::size_t k) const {
  return static_cast<double>(k) * store_every_ * dt_;
}

double AllenCahnOracle::value(double x, double t) const {
  const int n_sl = static_cast<int>(slices_.size());
  const double t_pos = std::clamp(t, 0.0, 1.0) / (store_every_ * dt_);
  int k = std::clamp(static_cast<int>(std::floor(t_pos)), 0, n_sl - 2);
  const int k0 = std::clamp(k - 1, 0, std::max(0, n_sl - 4));

  const double x_pos = (std::clamp(x, -1.0, 1.0) + 1.0) / dx_;
  double vals_t[4];
  const int nt_pts = std::min(4, n_sl);
  for (int j = 0; j < nt_pts; ++j) {
    vals_t[j] = interp_axis(slices_[k0 + j], x_pos, nx_);
  }
  if (nt_pts < 4) {
    const double s = t_pos - k;
    return vals_t[0] * (1.0 - s) + vals_t[1] * s;
  }
  std::vector<double> tmp(vals_t, vals_t + 4);
  return interp_axis(tmp, t_pos - k0, 4);
}

void AllenCahnOracle::save_cache(const std::string& csv_path,
                                 const std::string& meta_path) const {
  std::string csv = "x,t,u\n";
  for (std::size_t k = 0; k < slices_.size(); ++k) {
    const double t = slice_time(k);
    for (int i = 0; i < nx_; ++i) {
      csv += csv_row({format_double(-1.0 + i * dx_), format_double(t),
                      format_double(slices_[k][i])});
    }
  }
  write_file(csv_path, csv);

  nlohmann::json meta;
  meta["schema_version"] = 1;
  meta["problem"] = "allen_cahn";
  meta["nu"] = nu_;
  meta["nx"] = nx_;
  meta["nt"] = nt_;
  meta["store_every"] = store_every_;
  meta["solver"] = "crank_nicolson_imex_ab2";
  meta["checksum"] = to_hex(fnv1a64(csv));
  write_file(meta_path, meta.dump(2) + "\n");
}

bool AllenCahnOracle::try_load_cache(const std::string& csv_path,
                                     const std::string& meta_path) {
  if (!file_exists(csv_path) || !file_exists(meta_path)) return false;
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(meta_path));
  } catch (const std::exception&) {
    return false;
  }
  if (meta.value("schema_version", 0) != 1 ||
      meta.value("problem", "") != "allen_cahn" ||
      meta.value("nu", 0.0) != nu_ || meta.value("nx", 0) != nx_ ||
      meta.value("nt", 0) != nt_ ||
      meta.value("store_every", 0) != store_every_) {
    return false;
  }
  const std::string csv = read_file(csv_path);
  if (meta.value("checksum", "") != to_hex(fnv1a64(csv))) return false;

  const std::size_t n_slices = static_cast<std::size_t>(nt_ / store_every_) + 1;
  std::vector<std::vector<double>> loaded(n_slices,
                                          std::vector<double>(nx_, 0.0));
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) return false;
    const std::size_t k = row / static_cast<std::size_t>(nx_);
    const std::size_t i = row % static_cast<std::size_t>(nx_);
    if (k >= n_slices) return false;
    loaded[k][i] = std::stod(line.substr(c2 + 1));
    ++row;
  }
  if (row != n_slices * static_cast<std::size_t>(nx_)) return false;
  slices_ = std::move(loaded);
  return true;
}

}  // namespace kdpinn
