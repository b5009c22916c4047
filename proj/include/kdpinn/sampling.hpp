// SPDX-License-Identifier: Apache-2.0
//
// Collocation / constraint / distillation point generation. Points come
// from Sobol sequences (Joe-Kuo direction numbers, dimensions 1..3) with
// hash-based nested Owen scrambling; the integer pipeline makes streams
// reproducible across platforms. A stream is a single-owner stateful
// generator; clone_offset is the supported way to fork substreams.

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "kdpinn/problems.hpp"

namespace kdpinn {

/// Nested uniform (Owen) scramble of a 32-bit Sobol integer: each bit is
/// flipped by a hash of the seed and the more significant bits, which
/// permutes dyadic intervals at every level and so preserves net balance.
std::uint32_t owen_scramble(std::uint32_t x, std::uint64_t key);

class SobolStream {
 public:
  SobolStream(int dim, std::uint64_t seed, bool scramble = true);

  int dim() const { return dim_; }
  std::uint64_t counter() const { return counter_; }
  std::uint64_t seed() const { return seed_; }

  /// Next point in [0,1)^dim.
  void next(double* out);

  /// Row-major n x dim matrix of the next n points.
  std::vector<double> next_matrix(std::size_t n);

  /// Independent stream: same dimension, seed derived from (seed, salt),
  /// counter reset.
  SobolStream clone_offset(std::uint64_t salt) const;

 private:
  int dim_;
  bool scramble_;
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, kMaxDim> state_{};
  std::array<std::uint64_t, kMaxDim> keys_{};
};

struct SampleBatch {
  SampleRole role = SampleRole::kCollocation;
  int dim = 0;
  std::size_t n = 0;
  std::vector<double> points;   // row-major [n][dim], physical coordinates
  std::vector<double> weights;  // per-point, positive, mean 1

  const double* point(std::size_t i) const { return points.data() + i * dim; }
};

/// Draws n points for the given role: collocation and distillation map
/// [0,1)^d onto the domain box; constraint roles land exactly on their
/// locus. Throws std::invalid_argument if the problem lacks the role.
SampleBatch sample_role(const PdeProblem& problem, SampleRole role,
                        std::size_t n, SobolStream& stream);

/// Raw residual-informed weight of one point: 1 + eta * |r| / max|r|.
double informed_weight_raw(double residual_abs, double max_residual_abs,
                           double eta);

class MlpNetwork;

/// Reweights a collocation batch by the teacher's residual field and
/// normalizes the weights to mean 1. eta outside [0.5, 1] warns on stderr
/// but proceeds; an all-zero residual field leaves all weights at 1.
SampleBatch informed_weights(const SampleBatch& batch,
                             const MlpNetwork& teacher,
                             const PdeProblem& problem, double eta,
                             bool parallel = false);

struct OodRegion {
  std::string name;
  DomainBox box;
  int grid_ns = 200;  // S-axis resolution of the evaluation grid
  int grid_nt = 80;
};

/// The five out-of-domain evaluation boxes for the Black-Scholes study.
std::vector<OodRegion> ood_regions();

/// CSV export (role, coordinates, weight) for reproducibility audits.
std::string batch_to_csv(const SampleBatch& batch);

}  // namespace kdpinn
