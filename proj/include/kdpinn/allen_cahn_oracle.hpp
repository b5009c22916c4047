// SPDX-License-Identifier: Apache-2.0
//
// Reference solution of the Allen-Cahn benchmark on [-1,1] x [0,1]:
// Crank-Nicolson for the diffusion term, explicit Adams-Bashforth for the
// cubic reaction (IMEX). Time slices are stored on a uniform grid and
// queried with cubic interpolation.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace kdpinn {

class AllenCahnOracle {
 public:
  AllenCahnOracle(double nu, int nx = 512, int nt = 2000, int store_every = 10);

  double nu() const { return nu_; }
  int nx() const { return nx_; }
  int nt() const { return nt_; }
  int store_every() const { return store_every_; }

  double value(double x, double t) const;

  /// Solution profile at the k-th stored slice (row k of the grid).
  const std::vector<double>& slice(std::size_t k) const { return slices_[k]; }
  std::size_t n_slices() const { return slices_.size(); }
  double slice_time(std::size_t k) const;

  /// Writes the grid as CSV (x,t,u) plus a JSON sidecar holding the grid
  /// shape, nu, solver settings and a content checksum.
  void save_cache(const std::string& csv_path,
                  const std::string& meta_path) const;

  /// Loads a cached grid; returns false (leaving the oracle untouched) if
  /// the files are missing, the settings differ, or the checksum fails.
  bool try_load_cache(const std::string& csv_path,
                      const std::string& meta_path);

 private:
  double nu_;
  int nx_, nt_, store_every_;
  double dx_, dt_;
  std::vector<std::vector<double>> slices_;  // [slice][x index]

  void solve();
};

}  // namespace kdpinn
