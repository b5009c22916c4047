// SPDX-License-Identifier: Apache-2.0

#include "kdpinn/sampling.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "kdpinn/io.hpp"
#include "kdpinn/net.hpp"
#include "kdpinn/parallel.hpp"
#include "kdpinn/rng.hpp"

namespace kdpinn {

namespace {

constexpr int kBits = 32;

// Direction integers for dimensions 1..3 (Joe-Kuo initial values:
// dim 2 from polynomial x+1, dim 3 from x^2+x+1 with m = {1,3}).
struct DirectionTable {
  std::uint32_t v[kMaxDim][kBits];

  DirectionTable() {
    std::uint32_t m[kBits];
    // dim 1: van der Corput, m_j = 1.
    for (int j = 0; j < kBits; ++j) v[0][j] = 1u << (31 - j);
    // dim 2: s = 1, m_1 = 1, recurrence m_j = 2 m_{j-1} ^ m_{j-1}.
    m[0] = 1;
    for (int j = 1; j < kBits; ++j) m[j] = (m[j - 1] << 1) ^ m[j - 1];
    for (int j = 0; j < kBits; ++j) v[1][j] = m[j] << (31 - j);
    // dim 3: s = 2, a = 1, m = {1, 3}; m_j = 2 m_{j-1} ^ 4 m_{j-2} ^ m_{j-2}.
    m[0] = 1;
    m[1] = 3;
    for (int j = 2; j < kBits; ++j) {
      m[j] = (m[j - 1] << 1) ^ (m[j - 2] << 2) ^ m[j - 2];
    }
    for (int j = 0; j < kBits; ++j) v[2][j] = m[j] << (31 - j);
  }
};

const DirectionTable& directions() {
  static const DirectionTable table;
  return table;
}

int lowest_zero_bit(std::uint64_t n) {
  int b = 0;
  while (n & 1u) {
    n >>= 1;
    ++b;
  }
  return b;
}

}  // namespace

std::uint32_t owen_scramble(std::uint32_t x, std::uint64_t key) {
  std::uint32_t out = 0;
  for (int b = 31; b >= 0; --b) {
    // The flip at level b depends only on the more significant bits, so
    // points sharing a dyadic interval stay together.
    const std::uint32_t prefix = (b == 31) ? 0u : (x >> (b + 1));
    const std::uint64_t node =
        (static_cast<std::uint64_t>(prefix) << 5) | static_cast<unsigned>(b);
    const std::uint32_t flip = static_cast<std::uint32_t>(mix64(key ^ node)) & 1u;
    out |= (((x >> b) & 1u) ^ flip) << b;
  }
  return out;
}

SobolStream::SobolStream(int dim, std::uint64_t seed, bool scramble)
    : dim_(dim), scramble_(scramble), seed_(seed) {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("SobolStream: dimension must be in [1,3]");
  }
  for (int k = 0; k < dim_; ++k) {
    keys_[k] = mix64(seed ^ (0x5b5ad4f1e0a7c911ULL + static_cast<std::uint64_t>(k)));
  }
}

void SobolStream::next(double* out) {
  if (counter_ >= (1ULL << 32)) {
    throw std::overflow_error("SobolStream: counter exceeds 2^32");
  }
  const int c = lowest_zero_bit(counter_);
  for (int k = 0; k < dim_; ++k) state_[k] ^= directions().v[k][c];
  ++counter_;
  for (int k = 0; k < dim_; ++k) {
    const std::uint32_t bits =
        scramble_ ? owen_scramble(state_[k], keys_[k]) : state_[k];
    out[k] = std::ldexp(static_cast<double>(bits), -32);
  }
}

std::vector<double> SobolStream::next_matrix(std::size_t n) {
  if (n < 1) throw std::invalid_argument("SobolStream: need n >= 1");
  std::vector<double> pts(n * static_cast<std::size_t>(dim_));
  for (std::size_t i = 0; i < n; ++i) {
    next(pts.data() + i * static_cast<std::size_t>(dim_));
  }
  return pts;
}

SobolStream SobolStream::clone_offset(std::uint64_t salt) const {
  return SobolStream(dim_, mix64(seed_ ^ mix64(salt)), scramble_);
}

SampleBatch sample_role(const PdeProblem& problem, SampleRole role,
                        std::size_t n, SobolStream& stream) {
  if (stream.dim() != problem.domain.dim) {
    throw std::invalid_argument("sample_role: stream dimension mismatch");
  }
  SampleBatch batch;
  batch.role = role;
  batch.dim = problem.domain.dim;
  batch.n = n;
  batch.points.resize(n * static_cast<std::size_t>(batch.dim));
  batch.weights.assign(n, 1.0);

  const bool interior = (role == SampleRole::kCollocation ||
                         role == SampleRole::kDistillation);
  const ConstraintSpec* constraint =
      interior ? nullptr : problem.find_constraint(role);
  if (!interior && constraint == nullptr) {
    throw std::invalid_argument("sample_role: problem '" + problem.name +
                                "' has no " + role_name(role) + " constraint");
  }

  double unit[kMaxDim];
  for (std::size_t i = 0; i < n; ++i) {
    stream.next(unit);
    double* pt = batch.points.data() + i * static_cast<std::size_t>(batch.dim);
    if (interior) {
      for (int k = 0; k < batch.dim; ++k) {
        pt[k] = problem.domain.lo[k] + unit[k] * problem.domain.width(k);
      }
    } else {
      constraint->map_point(unit, pt);
    }
  }
  return batch;
}

double informed_weight_raw(double residual_abs, double max_residual_abs,
                           double eta) {
  if (max_residual_abs <= 0.0) return 1.0;
  return 1.0 + eta * residual_abs / max_residual_abs;
}

SampleBatch informed_weights(const SampleBatch& batch,
                             const MlpNetwork& teacher,
                             const PdeProblem& problem, double eta,
                             bool parallel) {
  if (eta < 0.5 || eta > 1.0) {
    std::fprintf(stderr,
                 "kdpinn: informed_weights eta=%g outside [0.5,1.0]; "
                 "proceeding\n",
                 eta);
  }
  SampleBatch out = batch;
  std::vector<double> res_abs(batch.n, 0.0);
  parallel_for(
      batch.n,
      [&](std::size_t i) {
        Jet2 jets[8];
        double res[8];
        teacher.forward_jets(
            {batch.point(i), static_cast<std::size_t>(batch.dim)},
            {jets, static_cast<std::size_t>(problem.n_outputs)});
        problem.residual(batch.point(i), jets, res);
        double norm2 = 0.0;
        for (int e = 0; e < problem.n_equations; ++e) norm2 += res[e] * res[e];
        res_abs[i] = std::sqrt(norm2);
      },
      parallel);

  // Batch max as the empirical surrogate for the domain max.
  double max_abs = 0.0;
  for (double r : res_abs) max_abs = std::max(max_abs, r);

  double sum = 0.0;
  for (std::size_t i = 0; i < batch.n; ++i) {
    out.weights[i] = informed_weight_raw(res_abs[i], max_abs, eta);
    sum += out.weights[i];
  }
  const double mean = sum / static_cast<double>(batch.n);
  for (double& w : out.weights) w /= mean;
  return out;
}

std::vector<OodRegion> ood_regions() {
  std::vector<OodRegion> regions;
  auto box = [](double s0, double s1, double t0, double t1) {
    return DomainBox{2, {s0, t0}, {s1, t1}, 1};
  };
  regions.push_back({"mild_right", box(1.6, 2.0, 0.0, 1.0), 200, 80});
  regions.push_back({"moderate_right", box(2.0, 3.0, 0.0, 1.0), 200, 80});
  regions.push_back({"hard_right", box(3.0, 5.0, 0.0, 1.0), 200, 80});
  regions.push_back({"left", box(0.2, 0.49, 0.0, 1.0), 200, 80});
  regions.push_back({"diag", box(1.6, 3.0, 0.6, 1.0), 200, 80});
  return regions;
}

std::string batch_to_csv(const SampleBatch& batch) {
  std::string csv = "role";
  for (int k = 0; k < batch.dim; ++k) csv += ",x" + std::to_string(k);
  csv += ",weight\n";
  for (std::size_t i = 0; i < batch.n; ++i) {
    csv += role_name(batch.role);
    for (int k = 0; k < batch.dim; ++k) {
      csv += "," + format_double(batch.point(i)[k]);
    }
    csv += "," + format_double(batch.weights[i]) + "\n";
  }
  return csv;
}

}  // namespace kdpinn
