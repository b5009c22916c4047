// SPDX-License-Identifier: Apache-2.0
//
// All randomness in the toolkit flows from one 64-bit master seed expanded
// into per-role substreams. The engine is std::mt19937_64 (its sequence is
// pinned by the standard) and uniform doubles are produced by an explicit
// bit mapping, so streams reproduce across platforms.

#pragma once

#include <cstdint>
#include <random>

namespace kdpinn {

/// splitmix64 finalizer; used for seed expansion and Owen-scramble hashing.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum class SeedRole : std::uint64_t {
  kTeacherInit = 0x7465616368ULL,
  kStudentInit = 0x73747564ULL,
  kCollocation = 0x636f6cULL,
  kBoundary = 0x626e64ULL,
  kTerminal = 0x7465726dULL,
  kInitial = 0x696e6974ULL,
  kDistillation = 0x6b64ULL,
  kScramble = 0x6f77656eULL,
  kLatencyInputs = 0x6c6174ULL,
};

inline std::uint64_t substream_seed(std::uint64_t master, SeedRole role) {
  return mix64(master ^ static_cast<std::uint64_t>(role));
}

/// Seeded uniform generator. Doubles come from the top 53 bits, uniform
/// in [0, 1).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace kdpinn
