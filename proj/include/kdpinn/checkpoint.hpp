// SPDX-License-Identifier: Apache-2.0
//
// Versioned JSON checkpoints. Doubles are written in shortest
// round-trip form, so a reload reproduces forward outputs exactly; a
// content checksum guards against corrupted files.

#pragma once

#include <cstdint>
#include <string>

#include "kdpinn/net.hpp"

namespace kdpinn {

struct TrainingMeta {
  std::string problem;
  std::string role;  // "teacher" or "student"
  long long iterations = 0;
  long long best_iter = 0;
  double best_loss = 0.0;
  std::uint64_t master_seed = 0;
};

void save_checkpoint(const MlpNetwork& net, const TrainingMeta& meta,
                     const std::string& path);

struct Checkpoint {
  MlpNetwork net;
  TrainingMeta meta;
};

/// Throws std::runtime_error on missing file, format mismatch, or
/// checksum failure.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace kdpinn
